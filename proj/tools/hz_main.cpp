// Command-line interface: reach / verify / train / bench / demo / plot.
// Exit codes: 0 success (train: verified safe), 1 file/parse error,
// 2 bad dimensions or configuration, 3 training failure or unsafe verdict.

#include "hzreach/apps.hpp"
#include "hzreach/json_io.hpp"
#include "hzreach/render.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>

namespace
{

using namespace hz;

// Flag > environment variable > default.
double env_or(const char* name, double fallback)
{
    if (const char* v = std::getenv(name))
        return std::atof(v);
    return fallback;
}

long env_or_long(const char* name, long fallback)
{
    if (const char* v = std::getenv(name))
        return std::atol(v);
    return fallback;
}

struct GlobalOpts
{
    std::uint64_t seed = static_cast<std::uint64_t>(env_or_long("HZ_SEED", 1));
    double mu = env_or("HZ_MU", 0.1);
    int nr = static_cast<int>(env_or_long("HZ_NR", -1)); // -1: scenario default
    double radius = env_or("HZ_A", -1.0);
    double lr = env_or("HZ_LR", -1.0);
    int verify_every = static_cast<int>(env_or_long("HZ_VERIFY_EVERY", 5));
    int max_iters = static_cast<int>(env_or_long("HZ_MAX_ITERS", -1));
};

void add_global_flags(CLI::App* cmd, GlobalOpts& g)
{
    cmd->add_option("--seed", g.seed, "random seed");
    cmd->add_option("--mu", g.mu, "barrier weight for the surrogate loss");
    cmd->add_option("--nr", g.nr, "scaling index (leading input-set coefficients)");
    cmd->add_option("--a", g.radius, "activation-domain radius");
    cmd->add_option("--lr", g.lr, "learning rate");
    cmd->add_option("--verify-every", g.verify_every, "exact-check period in iterations");
    cmd->add_option("--max-iters", g.max_iters, "iteration cap");
}

struct Scenario
{
    std::string type;
    ReluNetwork net;
    HybridZonotope Z{Matrix(0, 0), Matrix(0, 0), Vector(0), Matrix(0, 0), Matrix(0, 0), Vector(0)};
    HybridZonotope U = HybridZonotope::unit_box(1);
    std::optional<HybridZonotope> U_verify;
    Matrix M;
    Vector m;
    std::optional<ReachAvoidProblem> rap; // composite pipeline case
    TrainConfig cfg;
};

Scenario load_scenario(const std::string& path, const GlobalOpts& g)
{
    Json j = load_json_file(path);
    Scenario sc;
    sc.type = j.at("type").get<std::string>();
    const std::uint64_t seed = j.value("seed", static_cast<long>(g.seed));

    if (sc.type == "benchmark")
    {
        std::vector<Index> hidden;
        for (const auto& w : j.at("hidden"))
            hidden.push_back(w.get<Index>());
        BenchmarkScenario b = build_benchmark_scenario(hidden, seed);
        sc.net = b.net;
        sc.Z = b.Z;
        sc.U = b.U;
        const Index n0 = sc.net.input_dim(), nd = sc.net.output_dim();
        sc.M = Matrix::Zero(nd, n0 + nd);
        sc.M.rightCols(nd).setIdentity();
        sc.m = Vector::Zero(nd);
        sc.cfg.learning_rate = 0.02;
        sc.cfg.n_scaled = 2;
        sc.cfg.radius = 50.0;
        sc.cfg.max_iters = 200;
    }
    else if (sc.type == "fi")
    {
        AffineDynamics dyn = double_integrator_dynamics();
        HybridZonotope Xt = double_integrator_safe_set();
        HybridZonotope X = HybridZonotope::box(Vector::Zero(2), Vector::Constant(2, 150.0));
        const double eps = j.value("eps", 1e-3);
        FiProblem fp = build_fi_problem(dyn, Xt, X, eps);
        Matrix K(1, 2);
        K << -2, -1;
        sc.net = pretrain_linear_policy(Xt, K, {3}, seed);
        sc.Z = fp.Z;
        sc.U = fp.U;
        sc.U_verify = fp.U_verify;
        sc.M = fp.M;
        sc.m = fp.m;
        sc.cfg.learning_rate = 0.001;
        sc.cfg.n_scaled = 5;
        sc.cfg.radius = 1000.0;
        sc.cfg.max_iters = 5000;
    }
    else if (sc.type == "reach-avoid")
    {
        ReachAvoidSpec spec = make_default_reach_avoid_spec(seed);
        sc.net = spec.policy;
        sc.cfg.learning_rate = 0.001;
        sc.cfg.n_scaled = 2;
        sc.cfg.radius = spec.radius;
        sc.cfg.max_iters = 400;
        sc.rap = build_reach_avoid_problem(spec, sc.cfg.n_scaled);
    }
    else
    {
        throw std::invalid_argument("unknown scenario type: " + sc.type);
    }

    sc.cfg.mu = g.mu;
    sc.cfg.seed = seed;
    sc.cfg.verify_every = g.verify_every;
    if (g.nr >= 0)
        sc.cfg.n_scaled = g.nr;
    if (g.radius > 0)
        sc.cfg.radius = g.radius;
    if (g.lr > 0)
        sc.cfg.learning_rate = g.lr;
    if (g.max_iters >= 0)
        sc.cfg.max_iters = g.max_iters;
    return sc;
}

int cmd_reach(const std::string& net_file, const std::string& set_file, double radius,
              const std::string& out_file)
{
    ReluNetwork net = network_from_json(load_json_file(net_file));
    HybridZonotope Z = set_from_json(load_json_file(set_file));
    ReachResult rr = reach(net, Z, radius);
    Json out;
    out["graph"] = set_to_json(rr.graph);
    out["image"] = set_to_json(rr.image);
    out["radius_warning"] = rr.radius_warning;
    out["max_preactivation"] = rr.max_preactivation;
    save_json_file(out_file, out);
    std::cout << "image generators: continuous " << rr.image.num_gc() << ", binary "
              << rr.image.num_gb() << ", constraints " << rr.image.num_con() << "\n";
    if (rr.radius_warning)
        std::cout << "warning: sampled pre-activations reach "
                  << rr.max_preactivation << " (>90% of a=" << radius << ")\n";
    return 0;
}

int cmd_verify(const std::string& net_file, const std::string& set_file,
               const std::string& unsafe_file, double radius)
{
    ReluNetwork net = network_from_json(load_json_file(net_file));
    HybridZonotope Z = set_from_json(load_json_file(set_file));
    HybridZonotope U = set_from_json(load_json_file(unsafe_file));
    const Index n0 = net.input_dim(), nd = net.output_dim();
    Matrix M = Matrix::Zero(nd, n0 + nd);
    M.rightCols(nd).setIdentity();
    const bool safe = verify(net, Z, U, M, Vector::Zero(nd), radius);
    std::cout << (safe ? "safe: collision set is empty\n" : "unsafe: collision set is nonempty\n");
    return safe ? 0 : 3;
}

int cmd_train(const std::string& scenario_file, const GlobalOpts& g, const std::string& out_prefix)
{
    Scenario sc = load_scenario(scenario_file, g);
    TrainReport report;
    if (sc.rap)
    {
        report = train_collision(sc.rap->cp, nullptr, sc.net, sc.cfg);
    }
    else
    {
        report = train_to_safety(sc.net, sc.Z, sc.U, sc.M, sc.m, sc.cfg,
                                 sc.U_verify ? &*sc.U_verify : nullptr);
    }
    save_json_file(out_prefix + ".json", report_to_json(report));
    save_text_file(out_prefix + ".csv", report_to_csv(report));
    save_json_file(out_prefix + "_net.json", network_to_json(sc.net));
    std::cout << (report.success ? "verified safe" : "not verified") << " after "
              << report.total_iterations << " iterations\n";
    return report.success ? 0 : 3;
}

std::string line_plot_svg(const std::vector<double>& xs, const std::vector<double>& ys,
                          const std::string& xlabel, const std::string& ylabel)
{
    const double W = 480, H = 360, L = 60, Bm = 40;
    double xmax = 1, ymax = 1;
    for (double x : xs)
        xmax = std::max(xmax, x);
    for (double y : ys)
        ymax = std::max(ymax, y);
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\">\n<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"#ffffff\"/>\n";
    svg << "<line x1=\"" << L << "\" y1=\"" << H - Bm << "\" x2=\"" << W - 10 << "\" y2=\""
        << H - Bm << "\" stroke=\"#000\"/>\n";
    svg << "<line x1=\"" << L << "\" y1=\"" << H - Bm << "\" x2=\"" << L
        << "\" y2=\"10\" stroke=\"#000\"/>\n";
    svg << "<text x=\"" << W / 2 << "\" y=\"" << H - 8 << "\" font-size=\"12\">" << xlabel
        << "</text>\n";
    svg << "<text x=\"12\" y=\"" << H / 2 << "\" font-size=\"12\" transform=\"rotate(-90 12 "
        << H / 2 << ")\">" << ylabel << "</text>\n";
    svg << "<polyline fill=\"none\" stroke=\"#4878cf\" stroke-width=\"2\" points=\"";
    for (size_t i = 0; i < xs.size(); ++i)
    {
        const double px = L + xs[i] / xmax * (W - L - 10);
        const double py = (H - Bm) - ys[i] / ymax * (H - Bm - 10);
        if (i)
            svg << " ";
        svg << px << "," << py;
    }
    svg << "\"/>\n";
    for (size_t i = 0; i < xs.size(); ++i)
    {
        const double px = L + xs[i] / xmax * (W - L - 10);
        const double py = (H - Bm) - ys[i] / ymax * (H - Bm - 10);
        svg << "<circle cx=\"" << px << "\" cy=\"" << py << "\" r=\"3\" fill=\"#4878cf\"/>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

int cmd_bench(const std::vector<std::string>& width_specs, int repeats,
              const std::string& out_dir, const GlobalOpts& g)
{
    std::filesystem::create_directories(out_dir);
    std::ostringstream csv;
    csv << "widths,total_s,train_ms_mean,train_ms_std,milp_ms_mean,milp_ms_std,iterations\n";
    std::vector<double> neurons, periter;

    for (const std::string& spec : width_specs)
    {
        std::vector<Index> hidden;
        std::stringstream ss(spec);
        std::string tok;
        while (std::getline(ss, tok, 'x'))
            hidden.push_back(std::stol(tok));

        double total = 0, iters = 0;
        std::vector<double> train_ms, milp_ms;
        for (int rep = 0; rep < repeats; ++rep)
        {
            BenchmarkScenario b = build_benchmark_scenario(hidden, g.seed + rep);
            TrainConfig cfg;
            cfg.learning_rate = g.lr > 0 ? g.lr : 0.02;
            cfg.mu = g.mu;
            cfg.n_scaled = g.nr >= 0 ? g.nr : 2;
            cfg.radius = g.radius > 0 ? g.radius : 50.0;
            cfg.verify_every = g.verify_every;
            cfg.max_iters = g.max_iters >= 0 ? g.max_iters : 200;
            ReluNetwork net = b.net;
            const Index n0 = net.input_dim(), nd = net.output_dim();
            Matrix M = Matrix::Zero(nd, n0 + nd);
            M.rightCols(nd).setIdentity();
            TrainReport rep_ = train_to_safety(net, b.Z, b.U, M, Vector::Zero(nd), cfg);
            total += rep_.total_seconds;
            iters += rep_.total_iterations;
            for (const auto& it : rep_.iterations)
                train_ms.push_back(it.t_loss_ms + it.t_grad_ms + it.t_update_ms);
            for (const auto& v : rep_.verifications)
                milp_ms.push_back(v.t_ms);
            if (!rep_.success)
                std::cerr << "bench: width spec " << spec << " did not verify\n";
        }
        auto mean = [](const std::vector<double>& v)
        { return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / v.size(); };
        auto stdev = [&](const std::vector<double>& v)
        {
            if (v.size() < 2)
                return 0.0;
            const double m = mean(v);
            double s = 0;
            for (double x : v)
                s += (x - m) * (x - m);
            return std::sqrt(s / (v.size() - 1));
        };
        csv << spec << "," << total / repeats << "," << mean(train_ms) << "," << stdev(train_ms)
            << "," << mean(milp_ms) << "," << stdev(milp_ms) << "," << iters / repeats << "\n";

        double n_neurons = 0;
        for (Index h : hidden)
            n_neurons += static_cast<double>(h);
        neurons.push_back(n_neurons);
        periter.push_back(mean(train_ms));
        std::cout << "widths " << spec << ": " << mean(train_ms) << " ms/iteration, "
                  << mean(milp_ms) << " ms/check, " << iters / repeats << " iterations\n";
    }
    save_text_file(out_dir + "/bench.csv", csv.str());
    save_text_file(out_dir + "/bench.svg",
                   line_plot_svg(neurons, periter, "neurons", "ms per iteration"));
    return 0;
}

int cmd_demo_fi(const std::string& out_dir, const GlobalOpts& g)
{
    std::filesystem::create_directories(out_dir);
    AffineDynamics dyn = double_integrator_dynamics();
    HybridZonotope Xt = double_integrator_safe_set();
    HybridZonotope X = HybridZonotope::box(Vector::Zero(2), Vector::Constant(2, 150.0));
    FiProblem fp = build_fi_problem(dyn, Xt, X, 1e-3);
    Matrix K(1, 2);
    K << -2, -1;
    ReluNetwork net = pretrain_linear_policy(Xt, K, {3}, g.seed);

    TrainConfig cfg;
    cfg.learning_rate = g.lr > 0 ? g.lr : 0.001;
    cfg.mu = g.mu;
    cfg.n_scaled = g.nr >= 0 ? g.nr : 5;
    cfg.radius = g.radius > 0 ? g.radius : 1000.0;
    cfg.verify_every = g.verify_every;
    cfg.max_iters = g.max_iters >= 0 ? g.max_iters : 5000;

    auto next_set = [&](const ReluNetwork& pol)
    {
        ReachResult rr = reach(pol, Xt, cfg.radius, 0);
        return affine_map(dyn.C, dyn.d, rr.graph);
    };

    RenderBounds bounds{-2.4, 2.4, -2.4, 2.4};
    save_text_file(out_dir + "/fi_before.svg",
                   render_sets_svg({{Xt, "#57a05c", 0.5}, {next_set(net), "#4878cf", 0.5}}, {},
                                   bounds, 80));

    TrainReport report = train_to_safety(net, fp.Z, fp.U, fp.M, fp.m, cfg, &fp.U_verify);
    save_json_file(out_dir + "/fi_report.json", report_to_json(report));
    save_text_file(out_dir + "/fi_report.csv", report_to_csv(report));

    save_text_file(out_dir + "/fi_after.svg",
                   render_sets_svg({{Xt, "#57a05c", 0.5}, {next_set(net), "#4878cf", 0.5}}, {},
                                   bounds, 80));

    if (!report.success)
    {
        std::cout << "forward-invariance demo: training did not verify\n";
        return 3;
    }

    // Invariance certificate: sampled one-step containment.
    int pass = 0;
    const int n_cert = 10000;
    std::vector<Vector> samples = sample_points(Xt, n_cert, g.seed);
    for (const Vector& x : samples)
    {
        Vector xu(3);
        xu << x, forward_eval(net, x);
        Vector xn = dyn.C * xu + dyn.d;
        if (contains_point(Xt, xn))
            ++pass;
    }
    std::cout << "forward-invariance demo: verified in " << report.total_iterations
              << " iterations; certificate " << pass << "/" << n_cert << " samples stay inside\n";
    return pass == n_cert ? 0 : 3;
}

int cmd_demo_reach_avoid(const std::string& out_dir, const GlobalOpts& g)
{
    std::filesystem::create_directories(out_dir);
    ReachAvoidSpec spec = make_default_reach_avoid_spec(g.seed);
    TrainConfig cfg;
    cfg.learning_rate = g.lr > 0 ? g.lr : 0.001;
    cfg.mu = g.mu;
    cfg.n_scaled = g.nr >= 0 ? g.nr : 2;
    cfg.radius = g.radius > 0 ? g.radius : spec.radius;
    cfg.verify_every = g.verify_every;
    cfg.max_iters = g.max_iters >= 0 ? g.max_iters : 400;

    ReachAvoidProblem rap = build_reach_avoid_problem(spec, cfg.n_scaled);
    ReluNetwork policy = spec.policy;

    auto rollouts_svg = [&](const ReluNetwork& pol)
    {
        std::mt19937_64 rng(g.seed ^ 0x7f4a7c15ull);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        std::vector<RenderPath> paths;
        for (int i = 0; i < 40; ++i)
        {
            Vector x0(2), s(2);
            x0 << 0.1 * u(rng), 0.1 * u(rng);
            s << u(rng), u(rng);
            Vector k = forward_eval(pol, x0);
            RenderPath p;
            p.color = "#555555";
            for (int ti = 0; ti <= 24; ++ti)
            {
                const double t = spec.t_final * ti / 24.0;
                p.points.push_back(x0 + synthetic_trajectory(k, s, t));
            }
            paths.push_back(std::move(p));
        }
        RenderBounds bounds{-0.6, 2.4, -1.4, 1.4};
        HybridZonotope inflated = minkowski_sum(
            minkowski_sum(spec.obstacles[0], HybridZonotope::box(Vector::Zero(2), spec.body_half)),
            HybridZonotope::box(Vector::Zero(2), spec.e));
        return render_sets_svg({{spec.G, "#57a05c", 0.4},
                                {inflated, "#e8a33d", 0.4},
                                {spec.obstacles[0], "#c44e52", 0.7},
                                {spec.X0, "#4878cf", 0.7}},
                               paths, bounds, 80);
    };

    save_text_file(out_dir + "/reach_avoid_before.svg", rollouts_svg(policy));
    TrainReport report = train_collision(rap.cp, nullptr, policy, cfg);
    save_json_file(out_dir + "/reach_avoid_report.json", report_to_json(report));
    save_text_file(out_dir + "/reach_avoid_report.csv", report_to_csv(report));
    save_text_file(out_dir + "/reach_avoid_after.svg", rollouts_svg(policy));

    std::cout << "reach-avoid demo: " << (report.success ? "verified" : "not verified")
              << " after " << report.total_iterations << " iterations\n";
    return report.success ? 0 : 3;
}

int cmd_plot(const std::string& set_file, const std::string& out_file, int resolution)
{
    HybridZonotope P = set_from_json(load_json_file(set_file));
    const IntervalHull hull = generator_hull(P);
    RenderBounds bounds;
    bounds.xmin = hull.center(0) - 1.2 * hull.half(0) - 0.1;
    bounds.xmax = hull.center(0) + 1.2 * hull.half(0) + 0.1;
    bounds.ymin = hull.center(1) - 1.2 * hull.half(1) - 0.1;
    bounds.ymax = hull.center(1) + 1.2 * hull.half(1) + 0.1;
    save_text_file(out_file, render_sets_svg({{P, "#4878cf", 0.7}}, {}, bounds, resolution));
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"hybrid zonotope reachability and safe-training toolkit"};
    app.require_subcommand(1);
    GlobalOpts g;

    std::string net_file, set_file, unsafe_file, out_file = "out.json", scenario_file;
    std::string out_prefix = "report", out_dir = "bench_out", demo_name;
    double radius = 50.0;
    int repeats = 1, resolution = 80;
    std::vector<std::string> widths;

    CLI::App* reach_cmd = app.add_subcommand("reach", "exact image/graph of a set");
    reach_cmd->add_option("net", net_file)->required();
    reach_cmd->add_option("set", set_file)->required();
    reach_cmd->add_option("--a", radius, "activation-domain radius");
    reach_cmd->add_option("--out", out_file);

    CLI::App* verify_cmd = app.add_subcommand("verify", "exact emptiness of the collision set");
    verify_cmd->add_option("net", net_file)->required();
    verify_cmd->add_option("set", set_file)->required();
    verify_cmd->add_option("unsafe", unsafe_file)->required();
    verify_cmd->add_option("--a", radius);

    CLI::App* train_cmd = app.add_subcommand("train", "train a scenario to verified safety");
    train_cmd->add_option("scenario", scenario_file)->required();
    train_cmd->add_option("--out", out_prefix, "output prefix for report files");
    add_global_flags(train_cmd, g);

    CLI::App* bench_cmd = app.add_subcommand("bench", "benchmark across width specs");
    bench_cmd->add_option("widths", widths, "hidden widths, e.g. 10 20 30 or 120x120")
        ->required();
    bench_cmd->add_option("--repeats", repeats);
    bench_cmd->add_option("--out", out_dir);
    add_global_flags(bench_cmd, g);

    CLI::App* demo_cmd = app.add_subcommand("demo", "end-to-end demos: fi | reach-avoid");
    demo_cmd->add_option("name", demo_name)->required();
    demo_cmd->add_option("--out", out_dir);
    add_global_flags(demo_cmd, g);

    CLI::App* plot_cmd = app.add_subcommand("plot", "rasterize a planar set to SVG");
    plot_cmd->add_option("set", set_file)->required();
    plot_cmd->add_option("--out", out_file);
    plot_cmd->add_option("--resolution", resolution);

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (reach_cmd->parsed())
            return cmd_reach(net_file, set_file, radius, out_file);
        if (verify_cmd->parsed())
            return cmd_verify(net_file, set_file, unsafe_file, radius);
        if (train_cmd->parsed())
            return cmd_train(scenario_file, g, out_prefix);
        if (bench_cmd->parsed())
            return cmd_bench(widths, repeats, out_dir, g);
        if (demo_cmd->parsed())
        {
            if (demo_name == "fi")
                return cmd_demo_fi(out_dir, g);
            if (demo_name == "reach-avoid")
                return cmd_demo_reach_avoid(out_dir, g);
            std::cerr << "unknown demo: " << demo_name << "\n";
            return 2;
        }
        if (plot_cmd->parsed())
            return cmd_plot(set_file, out_file, resolution);
    }
    catch (const DimensionError& e)
    {
        std::cerr << "dimension error: " << e.what() << "\n";
        return 2;
    }
    catch (const nlohmann::json::exception& e)
    {
        std::cerr << "parse error: " << e.what() << "\n";
        return 1;
    }
    catch (const std::invalid_argument& e)
    {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
