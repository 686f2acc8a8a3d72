#include "rfsi/driver.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "rfsi/checkpoint.hpp"
#include "rfsi/errors.hpp"
#include "rfsi/vtk_io.hpp"

namespace rfsi {

namespace fs = std::filesystem;

int select_tip_node(const Mesh& mesh, int arm) {
    // arm direction: 0 -> +x, 1 -> +y, 2 -> -x, 3 -> -y
    const Vec2 dir = arm == 0 ? Vec2{1, 0} : arm == 1 ? Vec2{0, 1} : arm == 2 ? Vec2{-1, 0}
                                                                               : Vec2{0, -1};
    int best = -1;
    double best_r = -1.0;
    for (int nd = 0; nd < mesh.n_nodes(); ++nd) {
        if (!mesh.flag(nd, NodeInStructure)) continue;
        const Vec2 d = mesh.ref[nd] - mesh.center;
        if (dot(d, dir) < 0.5 * norm(d)) continue;  // keep nodes within the arm's sector
        const double r = norm(d);
        if (r > best_r + 1e-15) {
            best_r = r;
            best = nd;
        }
    }
    if (best < 0) throw ValidationError("no structure node found on the requested arm");
    return best;
}

Vec2 tip_deformation(const Mesh& mesh, const State& state, int tip_node) {
    const Mat2 Rt = rotation_matrix(state.theta).transposed();
    const Vec2 u_theta = rotational_displacement(mesh.ref[tip_node], mesh.center, state.theta);
    return Rt * (state.u_s[tip_node] - u_theta);
}

namespace {

void append_probe_csv(std::ofstream& os, double youngs, const ProbeSample& s) {
    char buf[200];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", youngs, s.t, s.u_d.x,
                  s.u_d.y, norm(s.u_d));
    os << buf;
}

}  // namespace

RunSummary run_simulation(const RunConfig& cfg, const fs::path& outdir,
                          std::optional<long long> max_steps) {
    cfg.validate();
    fs::create_directories(outdir);

    MeshResolution res;
    res.ring_nodes = cfg.ring_nodes;
    res.n_rf_layers = cfg.rf_layers;
    Mesh mesh = build_rotor_channel_mesh(cfg.geometry, cfg.mesh_h, res);
    RotationSpec spec = cfg.rotation;
    spec.center = cfg.geometry.center;

    Engine engine(std::move(mesh), cfg.materials, spec, cfg.loop, cfg.flow, cfg.disc, cfg.solver);
    State state = engine.initial_state();

    RunSummary summary;
    summary.tip_node = select_tip_node(engine.mesh(), cfg.output.probe_arm);

    std::ofstream log(outdir / "progress.log");
    std::ofstream probe(outdir / "probe.csv");
    if (!log || !probe) throw IoError("cannot open output files in " + outdir.string());
    probe << "E,t,ud_x,ud_y,|ud|\n";

    char buf[256];
    auto log_step = [&](const StepStats& st) {
        std::snprintf(buf, sizeof buf,
                      "step=%lld t=%.17g sweeps=%d newton=%d krylov=%d min_angle=%.17g\n",
                      state.step, state.t, st.sweeps, st.newton_iters, st.krylov_iters,
                      st.min_angle_deg);
        log << buf;
    };

    long long vtk_index = 0;
    auto maybe_vtk = [&]() {
        if (cfg.output.vtk_cadence <= 0.0) return;
        const double next_mark = vtk_index * cfg.output.vtk_cadence;
        if (state.t + 1e-12 >= next_mark) {
            std::snprintf(buf, sizeof buf, "snapshot_%06lld.vtk", vtk_index);
            write_vtk_snapshot(state, engine.mesh(), (outdir / buf).string());
            ++vtk_index;
        }
    };

    // t = 0 sample and snapshot
    summary.probe.push_back({state.t, tip_deformation(engine.mesh(), state, summary.tip_node)});
    append_probe_csv(probe, cfg.materials.youngs, summary.probe.back());
    maybe_vtk();

    const long long n_steps_total = static_cast<long long>(std::llround(cfg.loop.t_end / cfg.loop.dt));
    const long long n_steps = max_steps ? std::min(*max_steps, n_steps_total) : n_steps_total;

    bool dumped = false;
    for (long long n = 1; n <= n_steps; ++n) {
        StepStats st = engine.advance_time_step(state);
        summary.stats.push_back(st);
        summary.probe.push_back({state.t, tip_deformation(engine.mesh(), state, summary.tip_node)});
        append_probe_csv(probe, cfg.materials.youngs, summary.probe.back());
        log_step(st);
        maybe_vtk();
        if (cfg.output.write_mesh_snapshots) {
            std::snprintf(buf, sizeof buf, "mesh_%06lld.vtk", state.step);
            write_mesh_vtk(engine.mesh(), (outdir / buf).string());
        }
        if (cfg.output.dump_matrix && !dumped) {
            // one assembled system for offline analysis
            const auto bc = channel_dirichlet_values(engine.mesh(), cfg.flow, spec, state.t);
            const DofMap dofs = build_dof_map(engine.mesh(), bc);
            AssemblyInput in;
            in.v_old = &state.v;
            in.u_s_old = &state.u_s;
            in.v_newton = &state.v;
            in.w_mesh = &state.ale.w;
            in.dt = cfg.loop.dt;
            in.theta = state.theta;
            MonolithicSystem sys = assemble_monolithic(engine.mesh(), dofs, cfg.materials, cfg.disc, in);
            write_matrix_market_file((outdir / "system.mtx").string(), sys.full_matrix());
            dumped = true;
        }
    }

    summary.steps = state.step;
    summary.final_min_angle = mesh_quality(engine.mesh()).min_angle_deg;
    write_checkpoint((outdir / "state_final.rfsi").string(), state);
    if (!log || !probe) throw IoError("writing outputs failed in " + outdir.string());
    return summary;
}

SweepOutcome run_stiffness_sweep(const RunConfig& base, const std::vector<double>& youngs_list,
                                 const fs::path& outdir) {
    if (youngs_list.empty()) throw ValidationError("stiffness sweep needs at least one E value");
    for (std::size_t i = 0; i < youngs_list.size(); ++i) {
        if (youngs_list[i] <= 0.0) throw ValidationError("E values must be positive");
        if (i > 0 && !(youngs_list[i] > youngs_list[i - 1]))
            throw ValidationError("E values must be ascending");
    }
    fs::create_directories(outdir);
    SweepOutcome out;
    out.youngs = youngs_list;
    out.csv_path = outdir / "sweep.csv";
    std::ofstream csv(out.csv_path);
    if (!csv) throw IoError("cannot open " + out.csv_path.string());
    csv << "E,t,ud_x,ud_y,|ud|\n";
    std::ofstream failures(outdir / "sweep_failures.log");

    for (double e_val : youngs_list) {
        RunConfig cfg = base;
        cfg.materials.youngs = e_val;
        char sub[64];
        std::snprintf(sub, sizeof sub, "E_%.3e", e_val);
        const fs::path rundir = outdir / sub;
        try {
            RunSummary s = run_simulation(cfg, rundir);
            for (const ProbeSample& ps : s.probe) append_probe_csv(csv, e_val, ps);
            out.succeeded.push_back(true);
        } catch (const Error& err) {
            out.succeeded.push_back(false);
            out.failures.push_back(std::string(sub) + ": " + err.what());
            failures << sub << ": " << err.what() << "\n";
        }
    }
    return out;
}

}  // namespace rfsi
