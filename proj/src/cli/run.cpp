#include "sorted_effects/cli/run.hpp"

#include "sorted_effects/classify.hpp"
#include "sorted_effects/cli/options.hpp"
#include "sorted_effects/cli/svg.hpp"
#include "sorted_effects/cli/synth.hpp"
#include "sorted_effects/cli/table_io.hpp"
#include "sorted_effects/confset.hpp"
#include "sorted_effects/error.hpp"
#include "sorted_effects/spe.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <sstream>
#include <thread>

namespace sorted_effects::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json vector_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(number(v(k)));
    return out;
}

json config_json(const RunConfig& c) {
    json j;
    j["command"] = command_name(c.command);
    if (c.command == Command::synth) {
        j["dgp"] = c.dgp;
        j["n"] = c.n;
        j["seed"] = c.seed;
        j["output"] = c.output;
        return j;
    }
    j["data"] = c.data;
    j["schema"] = c.schema;
    j["factors"] = c.factors;
    j["samp_weight"] = c.samp_weight ? json(*c.samp_weight) : json(nullptr);
    j["drop_na"] = c.drop_na;
    j["fm"] = c.fm;
    j["method"] = c.method;
    j["taus"] = c.taus;
    j["var"] = c.var;
    j["var_type"] = c.var_type;
    j["compare"] = c.compare;
    j["subgroup"] = c.subgroup;
    j["alpha"] = c.alpha;
    j["seed"] = c.seed;
    j["b"] = c.b;
    j["boot_type"] = c.boot_type;
    j["bc"] = c.bc;
    j["parallel"] = c.parallel;
    j["ncores"] = c.ncores;
    j["out_dir"] = c.out_dir;
    switch (c.command) {
        case Command::spe: j["us"] = c.us; break;
        case Command::ca:
            j["u"] = c.u;
            j["interest"] = c.interest;
            j["cl"] = c.cl;
            j["t"] = c.t;
            j["cat"] = c.cat;
            j["range_cb"] = c.range_cb;
            break;
        case Command::subpop:
            j["u"] = c.u;
            j["varx"] = c.varx;
            j["vary"] = c.vary;
            j["overlap"] = c.overlap;
            j["vars"] = c.vars;
            break;
        case Command::synth: break;
    }
    return j;
}

struct Context {
    Context(const RunConfig& c, std::ostream& l) : config(c), log(l) {}

    const RunConfig& config;
    std::ostream& log;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    std::vector<std::string> warnings;
    std::vector<std::string> files;
    unsigned threads = 1;

    fs::path path(const std::string& name) const { return fs::path(config.out_dir) / name; }

    void write(const std::string& name, const std::string& content) {
        write_file(path(name).string(), content);
        files.push_back(name);
    }

    void write_meta(std::size_t replicates, std::size_t failures, json extra = json::object()) {
        json meta;
        meta["config"] = config_json(config);
        meta["seed"] = config.seed;
        meta["replicates"] = replicates;
        meta["replicate_failures"] = failures;
        meta["threads"] = threads;
        meta["warnings"] = warnings;
        meta["files"] = files;
        meta["wall_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        for (auto& [k, v] : extra.items()) meta[k] = v;
        write_file(path("meta.json").string(), meta.dump(2) + "\n");
    }
};

Dataset load_data(Context& ctx) {
    const RunConfig& c = ctx.config;
    if (c.data.empty()) throw Error(ErrorCategory::config, "--data is required");
    ColumnSchema schema;
    if (!c.schema.empty()) schema = load_schema(c.schema);
    for (const auto& f : c.factors) {
        if (std::find(schema.factors.begin(), schema.factors.end(), f) == schema.factors.end()) schema.factors.push_back(f);
    }
    if (c.samp_weight) schema.weight = c.samp_weight;
    Dataset data = load_csv(c.data, schema, c.drop_na, &ctx.warnings);
    for (const auto& w : ctx.warnings) ctx.log << "warning: " << w << '\n';
    return data;
}

ModelSpec model_spec(const RunConfig& c) {
    ModelSpec spec;
    spec.method = parse_method(c.method);
    spec.taus = spec.method == Method::qr ? parse_grid(c.taus) : std::vector<double>{};
    spec.validate();
    return spec;
}

EffectConfig effect_config(const RunConfig& c, const Dataset& data) {
    EffectConfig e;
    if (c.var.empty()) throw Error(ErrorCategory::config, "--var is required");
    e.var = c.var;
    e.type = parse_effect_type(c.var_type);
    if (!c.compare.empty()) {
        if (c.compare.size() != 2) throw Error(ErrorCategory::config, "--compare takes exactly two levels");
        if (e.type != EffectType::categorical) {
            throw Error(ErrorCategory::config, "--compare applies only to --var-type categorical");
        }
        e.compare = std::make_pair(c.compare[0], c.compare[1]);
    }
    if (!c.subgroup.empty()) e.subgroup = parse_subgroup(c.subgroup, data);
    return e;
}

BootstrapPlan bootstrap_plan(Context& ctx) {
    const RunConfig& c = ctx.config;
    BootstrapPlan plan;
    plan.type = parse_bootstrap_type(c.boot_type);
    plan.replicates = c.b;
    plan.seed = c.seed;
    unsigned requested = 1;
    if (c.parallel) requested = c.ncores ? c.ncores : std::max(1u, std::thread::hardware_concurrency());
    plan.threads = resolve_threads(requested);
    ctx.threads = plan.threads;
    plan.validate();
    if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw Error(ErrorCategory::config, "--alpha must lie in (0, 1)");
    return plan;
}

EffectPipeline make_pipeline(Context& ctx, const Dataset& data) {
    const RunConfig& c = ctx.config;
    if (c.fm.empty()) throw Error(ErrorCategory::config, "--fm is required");
    const TermSchema schema = expand_terms(parse_formula(c.fm));
    EffectPipeline pipeline(data, schema, model_spec(c), effect_config(c, data), /*drop_aliased=*/true);
    for (const auto& w : pipeline.design().info->warnings) {
        ctx.warnings.push_back(w);
        ctx.log << "warning: " << w << '\n';
    }
    return pipeline;
}

std::string csv_text(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
    std::ostringstream out;
    write_csv_row(out, header);
    for (const auto& r : rows) write_csv_row(out, r);
    return out.str();
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

// ---- spe ----

void run_spe(Context& ctx) {
    const RunConfig& c = ctx.config;
    const std::vector<double> us = parse_grid(c.us);
    validate_grid(us, "us");
    const Dataset data = load_data(ctx);
    const BootstrapPlan plan = bootstrap_plan(ctx);
    const EffectPipeline pipeline = make_pipeline(ctx, data);
    const SpeResult res = spe_inference(pipeline, us, plan, c.alpha, c.bc);

    std::vector<std::vector<std::string>> rows;
    for (std::size_t k = 0; k < us.size(); ++k) {
        const auto i = static_cast<Eigen::Index>(k);
        rows.push_back({format_number(us[k]), format_number(res.estimate(i)), format_number(res.se(i)),
                        format_number(res.pointwise_lower(i)), format_number(res.pointwise_upper(i)),
                        format_number(res.uniform_lower(i)), format_number(res.uniform_upper(i))});
    }
    ctx.write("spe.csv", csv_text({"u", "est", "se", "plb", "pub", "ulb", "uub"}, rows));
    ctx.write("ape.csv", csv_text({"est", "se", "lb", "ub"},
                                  {{format_number(res.ape.estimate), format_number(res.ape.se),
                                    format_number(res.ape.lower), format_number(res.ape.upper)}}));

    json j;
    j["us"] = us;
    j["alpha"] = res.alpha;
    j["bias_corrected"] = res.bias_corrected;
    j["spe"] = {{"estimate", vector_json(res.estimate)},
                {"raw", vector_json(res.raw)},
                {"se", vector_json(res.se)},
                {"pointwise_lower", vector_json(res.pointwise_lower)},
                {"pointwise_upper", vector_json(res.pointwise_upper)},
                {"uniform_lower", vector_json(res.uniform_lower)},
                {"uniform_upper", vector_json(res.uniform_upper)}};
    j["ape"] = {{"estimate", number(res.ape.estimate)},
                {"raw", number(res.ape.raw)},
                {"se", number(res.ape.se)},
                {"lower", number(res.ape.lower)},
                {"upper", number(res.ape.upper)}};
    j["uniform_cv"] = number(res.uniform_cv);
    j["pointwise_cv"] = number(res.pointwise_cv);
    j["degenerate"] = res.degenerate;
    j["replicates"] = res.replicates;
    j["failures"] = res.failures;
    ctx.write("spe.json", j.dump(2) + "\n");

    SpePlotData plot;
    plot.u = us;
    plot.estimate = to_std(res.estimate);
    plot.pointwise_lower = to_std(res.pointwise_lower);
    plot.pointwise_upper = to_std(res.pointwise_upper);
    plot.uniform_lower = to_std(res.uniform_lower);
    plot.uniform_upper = to_std(res.uniform_upper);
    plot.ape = res.ape.estimate;
    plot.ape_lower = res.ape.lower;
    plot.ape_upper = res.ape.upper;
    plot.title = "SPE of " + c.var + " (" + c.method + ")";
    ctx.write("spe.svg", spe_svg(plot));
    ctx.write_meta(res.replicates, res.failures);
}

// ---- ca ----

std::vector<std::string> variables_of_interest(const RunConfig& c, const Dataset& data) {
    if (c.t.empty()) {
        std::vector<std::string> out;
        for (std::size_t k = 0; k < std::min<std::size_t>(2, data.cols()); ++k) out.push_back(data.column(k).name);
        return out;
    }
    std::vector<std::string> tokens;
    for (const auto& piece : c.t) {
        for (auto& s : split_list(piece)) tokens.push_back(std::move(s));
    }
    const bool selection = tokens.size() == data.cols() &&
                           std::all_of(tokens.begin(), tokens.end(), [](const std::string& s) { return s == "0" || s == "1"; });
    if (selection) {
        std::vector<int> sel;
        for (const auto& s : tokens) sel.push_back(s == "1" ? 1 : 0);
        return select_columns(data, sel);
    }
    return tokens;
}

std::vector<std::string> flatten(const std::vector<std::string>& pieces) {
    std::vector<std::string> out;
    for (const auto& p : pieces) {
        for (auto& s : split_list(p)) out.push_back(std::move(s));
    }
    return out;
}

void run_ca_moment(Context& ctx, const EffectPipeline& pipeline, const std::vector<std::string>& t,
                   const BootstrapPlan& plan) {
    const RunConfig& c = ctx.config;
    const CaCompare cl = parse_ca_compare(c.cl);
    const auto vars = reported_variables(pipeline.data(), t, flatten(c.cat));
    const CaMomentResult res = ca_inference(pipeline, vars, c.u, plan, c.bc);

    std::vector<std::vector<std::string>> rows;
    for (std::size_t k = 0; k < res.names.size(); ++k) {
        const auto i = static_cast<Eigen::Index>(k);
        if (cl == CaCompare::both) {
            rows.push_back({res.names[k], format_number(res.most(i)), format_number(res.se_most(i)),
                            format_number(res.least(i)), format_number(res.se_least(i))});
        } else {
            rows.push_back({res.names[k], format_number(res.diff(i)), format_number(res.se_diff(i)),
                            format_number(res.p_joint(i)), format_number(res.p_pointwise(i)),
                            format_number(res.p_cat(i))});
        }
    }
    if (cl == CaCompare::both) {
        ctx.write("ca_moments.csv", csv_text({"variable", "most", "se_most", "least", "se_least"}, rows));
    } else {
        ctx.write("ca_moments.csv", csv_text({"variable", "estimate", "se", "p_joint", "p_pointwise", "p_cat"}, rows));
    }

    json j;
    j["interest"] = "moment";
    j["cl"] = ca_compare_name(cl);
    j["u"] = res.u;
    j["bias_corrected"] = res.bias_corrected;
    j["variables"] = res.names;
    j["cat_groups"] = res.cat_groups;
    j["most"] = vector_json(res.most);
    j["least"] = vector_json(res.least);
    j["diff"] = vector_json(res.diff);
    j["raw_most"] = vector_json(res.raw_most);
    j["raw_least"] = vector_json(res.raw_least);
    j["raw_diff"] = vector_json(res.raw_diff);
    j["se_most"] = vector_json(res.se_most);
    j["se_least"] = vector_json(res.se_least);
    j["se_diff"] = vector_json(res.se_diff);
    j["p_pointwise"] = vector_json(res.p_pointwise);
    j["p_joint"] = vector_json(res.p_joint);
    j["p_cat"] = vector_json(res.p_cat);
    j["degenerate"] = res.degenerate;
    j["replicates"] = res.replicates;
    j["failures"] = res.failures;
    ctx.write("ca.json", j.dump(2) + "\n");
    if (!res.degenerate.empty()) {
        std::string msg = "zero standard error (p-values omitted) for:";
        for (const auto& d : res.degenerate) msg += " " + d;
        ctx.warnings.push_back(msg);
    }
    ctx.write_meta(res.replicates, res.failures);
}

void run_ca_dist(Context& ctx, const EffectPipeline& pipeline, const std::vector<std::string>& t,
                 const BootstrapPlan& plan) {
    const RunConfig& c = ctx.config;
    const auto range_cb = parse_optional_grid(c.range_cb);
    const CaDistResult res = ca_distribution(pipeline, t, c.u, range_cb, plan, c.alpha);

    std::vector<std::vector<std::string>> rows;
    json curves = json::array();
    for (const auto& curve : res.curves) {
        for (Eigen::Index k = 0; k < curve.points.size(); ++k) {
            rows.push_back({curve.variable, format_number(curve.points(k)), "most", format_number(curve.most(k)),
                            format_number(curve.most_lower(k)), format_number(curve.most_upper(k))});
        }
        for (Eigen::Index k = 0; k < curve.points.size(); ++k) {
            rows.push_back({curve.variable, format_number(curve.points(k)), "least", format_number(curve.least(k)),
                            format_number(curve.least_lower(k)), format_number(curve.least_upper(k))});
        }
        curves.push_back({{"variable", curve.variable},
                          {"points", vector_json(curve.points)},
                          {"most", vector_json(curve.most)},
                          {"most_lower", vector_json(curve.most_lower)},
                          {"most_upper", vector_json(curve.most_upper)},
                          {"least", vector_json(curve.least)},
                          {"least_lower", vector_json(curve.least_lower)},
                          {"least_upper", vector_json(curve.least_upper)},
                          {"cv_most", number(curve.cv_most)},
                          {"cv_least", number(curve.cv_least)}});

        DistPlotData plot;
        plot.variable = curve.variable;
        plot.points = to_std(curve.points);
        plot.most = to_std(curve.most);
        plot.most_lower = to_std(curve.most_lower);
        plot.most_upper = to_std(curve.most_upper);
        plot.least = to_std(curve.least);
        plot.least_lower = to_std(curve.least_lower);
        plot.least_upper = to_std(curve.least_upper);
        ctx.write("ca_dist_" + curve.variable + ".svg", dist_svg(plot));
    }
    ctx.write("ca_dist.csv", csv_text({"variable", "point", "group", "cdf", "lower", "upper"}, rows));
    json j;
    j["interest"] = "dist";
    j["u"] = res.u;
    j["alpha"] = res.alpha;
    j["curves"] = curves;
    j["replicates"] = res.replicates;
    j["failures"] = res.failures;
    ctx.write("ca.json", j.dump(2) + "\n");
    ctx.write_meta(res.replicates, res.failures);
}

void run_ca(Context& ctx) {
    const RunConfig& c = ctx.config;
    if (c.interest != "moment" && c.interest != "dist") {
        throw Error(ErrorCategory::config, "--interest must be moment or dist");
    }
    parse_ca_compare(c.cl);
    if (!(c.u > 0.0 && c.u < 0.5)) throw Error(ErrorCategory::config, "--u must lie in (0, 0.5)");
    if (c.interest == "dist") parse_optional_grid(c.range_cb);
    const Dataset data = load_data(ctx);
    const auto t = variables_of_interest(c, data);
    const BootstrapPlan plan = bootstrap_plan(ctx);
    const EffectPipeline pipeline = make_pipeline(ctx, data);
    if (c.interest == "moment") run_ca_moment(ctx, pipeline, t, plan);
    else run_ca_dist(ctx, pipeline, t, plan);
}

// ---- subpop ----

std::vector<std::string> member_header(const Dataset& data, bool qr) {
    std::vector<std::string> h{"row"};
    if (qr) h.push_back("tau");
    for (const auto& name : data.column_names()) h.push_back(name);
    h.push_back("delta");
    return h;
}

std::vector<std::string> member_row(const Dataset& data, const EffectVector& e, const std::vector<double>& taus,
                                    std::size_t k) {
    const std::size_t i = e.unit_of(k);
    std::vector<std::string> r{std::to_string(i + 1)};
    if (!taus.empty()) r.push_back(format_number(taus[k / e.units]));
    for (const auto& col : data.columns()) {
        r.push_back(col.cell_text(i));
    }
    r.push_back(format_number(e.delta(static_cast<Eigen::Index>(k))));
    return r;
}

void run_subpop(Context& ctx) {
    const RunConfig& c = ctx.config;
    if (!(c.u > 0.0 && c.u < 0.5)) throw Error(ErrorCategory::config, "--u must lie in (0, 0.5)");
    if (c.varx.empty() != c.vary.empty()) throw Error(ErrorCategory::config, "--varx and --vary go together");
    const Dataset data = load_data(ctx);
    const BootstrapPlan plan = bootstrap_plan(ctx);
    const EffectPipeline pipeline = make_pipeline(ctx, data);
    const EffectVector effects = pipeline.effects(pipeline.sampling_weights());
    const ConfSetResult res = subpop_inference(pipeline, c.u, plan, c.alpha);
    const bool qr = pipeline.spec().method == Method::qr;
    const std::vector<double> taus = qr ? pipeline.spec().taus : std::vector<double>{};

    for (const char* side : {"most", "least"}) {
        const RowMask& mask = std::string(side) == "most" ? res.sets.most : res.sets.least;
        std::vector<std::vector<std::string>> rows;
        for (std::size_t k = 0; k < mask.size(); ++k) {
            if (mask[k]) rows.push_back(member_row(data, effects, taus, k));
        }
        ctx.write(std::string("subpop_members_") + side + ".csv", csv_text(member_header(data, qr), rows));
    }

    std::vector<std::string> header{"row"};
    if (qr) header.push_back("tau");
    for (const char* h : {"delta", "subgroup", "most", "least", "cs_most", "cs_least", "se_least", "se_most"}) {
        header.push_back(h);
    }
    std::vector<std::vector<std::string>> set_rows;
    for (std::size_t k = 0; k < effects.size(); ++k) {
        const auto i = static_cast<Eigen::Index>(k);
        std::vector<std::string> r{std::to_string(effects.unit_of(k) + 1)};
        if (qr) r.push_back(format_number(taus[k / effects.units]));
        r.push_back(format_number(effects.delta(i)));
        for (bool flag : {bool(res.subgroup[k]), bool(res.sets.most[k]), bool(res.sets.least[k]), bool(res.cs_most[k]),
                          bool(res.cs_least[k])}) {
            r.push_back(flag ? "1" : "0");
        }
        r.push_back(format_number(res.se_least(i)));
        r.push_back(format_number(res.se_most(i)));
        set_rows.push_back(std::move(r));
    }
    ctx.write("subpop_sets.csv", csv_text(header, set_rows));

    std::vector<std::string> vars = flatten(c.vars);
    if (vars.empty()) {
        for (const auto& col : data.columns()) {
            if (!col.is_factor()) vars.push_back(col.name);
        }
    }
    std::vector<std::vector<std::string>> stat_rows;
    for (const char* side : {"most", "least"}) {
        const RowMask& mask = std::string(side) == "most" ? res.sets.most : res.sets.least;
        for (const auto& s : summarize_affected(data, effects, mask, vars)) {
            stat_rows.push_back({side, s.variable, format_number(s.min), format_number(s.q1), format_number(s.median),
                                 format_number(s.mean), format_number(s.q3), format_number(s.max)});
        }
    }
    ctx.write("subpop_stats.csv",
              csv_text({"affected", "variable", "min", "q1", "median", "mean", "q3", "max"}, stat_rows));

    if (!c.varx.empty()) {
        const Projection p = project_sets(data, effects, res, c.varx, c.vary, c.overlap);
        ScatterPlotData plot;
        plot.varx = c.varx;
        plot.vary = c.vary;
        for (const auto& pt : p.most) {
            plot.most_x.push_back(pt.x);
            plot.most_y.push_back(pt.y);
        }
        for (const auto& pt : p.least) {
            plot.least_x.push_back(pt.x);
            plot.least_y.push_back(pt.y);
        }
        ctx.write("subpop_proj.svg", scatter_svg(plot));
    }

    auto count = [](const RowMask& m) { return static_cast<std::size_t>(std::count(m.begin(), m.end(), true)); };
    json j;
    j["u"] = res.u;
    j["alpha"] = res.alpha;
    j["lower_threshold"] = number(res.sets.lower_threshold);
    j["upper_threshold"] = number(res.sets.upper_threshold);
    j["c_least"] = number(res.c_least);
    j["c_most"] = number(res.c_most);
    j["argmin_least_row"] = effects.unit_of(res.argmin_least) + 1;
    j["argmin_most_row"] = effects.unit_of(res.argmin_most) + 1;
    j["sizes"] = {{"subgroup", count(res.subgroup)},
                  {"most", count(res.sets.most)},
                  {"least", count(res.sets.least)},
                  {"cs_most", count(res.cs_most)},
                  {"cs_least", count(res.cs_least)}};
    j["replicates"] = res.replicates;
    j["failures"] = res.failures;
    ctx.write("subpop.json", j.dump(2) + "\n");
    ctx.write_meta(res.replicates, res.failures);
}

// ---- synth ----

void run_synth(Context& ctx) {
    const RunConfig& c = ctx.config;
    if (c.dgp.empty()) throw Error(ErrorCategory::config, "--dgp is required");
    const Dataset data = synth(c.dgp, c.n, c.seed);
    const std::string csv = dataset_csv(data);
    if (c.output.empty() || c.output == "-") {
        ctx.log << csv;
    } else {
        write_file(c.output, csv);
    }
}

}  // namespace

const char* command_name(Command command) {
    switch (command) {
        case Command::spe: return "spe";
        case Command::ca: return "ca";
        case Command::subpop: return "subpop";
        case Command::synth: return "synth";
    }
    return "?";
}

RunConfig parse_command_line(int argc, const char* const* argv) {
    RunConfig cfg;
    CLI::App app{"Sorted partial effects, classification analysis, and affected-subpopulation confidence sets", "sorted_effects"};
    app.require_subcommand(1);

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--data", cfg.data, "Input CSV with a header row")->required();
        sub->add_option("--schema", cfg.schema, "JSON schema declaring factor columns and the weight column");
        sub->add_option("--factors", cfg.factors, "Columns to read as factors")->delimiter(',');
        sub->add_option("--samp-weight", cfg.samp_weight, "Sampling-weight column");
        sub->add_flag("--drop-na", cfg.drop_na, "Drop rows with missing cells instead of failing");
        sub->add_option("--fm", cfg.fm, "Model formula, e.g. \"y ~ t + x\"")->required();
        sub->add_option("--method", cfg.method, "ols | logit | probit | qr")->capture_default_str();
        sub->add_option("--taus", cfg.taus, "Quantile indexes for qr (a:b/d or comma list)")->capture_default_str();
        sub->add_option("--var", cfg.var, "Variable of interest")->required();
        sub->add_option("--var-type", cfg.var_type, "binary | categorical | continuous")->capture_default_str();
        sub->add_option("--compare", cfg.compare, "Two factor levels to compare (categorical)")->expected(2);
        sub->add_option("--subgroup", cfg.subgroup, "Population of interest, e.g. \"female == 1 & age < 40\"");
        sub->add_option("--alpha", cfg.alpha, "Significance level")->capture_default_str();
        sub->add_option("--seed", cfg.seed, "Bootstrap seed")->capture_default_str();
        sub->add_option("-b", cfg.b, "Bootstrap replicates")->capture_default_str();
        sub->add_option("--boot-type", cfg.boot_type, "nonpar | weighted")->capture_default_str();
        sub->add_flag("--parallel", cfg.parallel, "Run replicates on several threads");
        sub->add_option("--ncores", cfg.ncores, "Threads with --parallel (0 = all)")->capture_default_str();
        sub->add_option("--out-dir", cfg.out_dir, "Directory for result files")->capture_default_str();
    };
    auto bc_flag = [&](CLI::App* sub) {
        sub->add_flag_callback("--no-bc", [&]() { cfg.bc = false; }, "Report estimates without bias correction");
    };

    CLI::App* spe = app.add_subcommand("spe", "Sorted partial effects and the APE with bootstrap bands");
    add_common(spe);
    bc_flag(spe);
    spe->add_option("--us", cfg.us, "Quantile indexes (a:b/d or comma list)")->capture_default_str();

    CLI::App* ca = app.add_subcommand("ca", "Classification analysis of the most and least affected groups");
    add_common(ca);
    bc_flag(ca);
    ca->add_option("--u", cfg.u, "Tail index defining the groups")->capture_default_str();
    ca->add_option("--interest", cfg.interest, "moment | dist")->capture_default_str();
    ca->add_option("--cl", cfg.cl, "both | diff")->capture_default_str();
    ca->add_option("--t", cfg.t, "Variables of interest: names, or a 0/1 vector over columns");
    ca->add_option("--cat", cfg.cat, "Variables in --t whose levels get within-factor p-values");
    ca->add_option("--range-cb", cfg.range_cb, "Quantile indexes for dist evaluation points, or none")
        ->capture_default_str();

    CLI::App* subpop = app.add_subcommand("subpop", "Most/least affected sets and their confidence sets");
    add_common(subpop);
    subpop->add_option("--u", cfg.u, "Tail index defining the sets")->capture_default_str();
    subpop->add_option("--varx", cfg.varx, "Horizontal variable of the projection plot");
    subpop->add_option("--vary", cfg.vary, "Vertical variable of the projection plot");
    subpop->add_flag("--overlap", cfg.overlap, "Keep units that fall in both confidence sets");
    subpop->add_option("--vars", cfg.vars, "Variables summarized in subpop_stats.csv (default: all numeric)");

    CLI::App* syn = app.add_subcommand("synth", "Write a synthetic dataset with known partial effects");
    syn->add_option("--dgp", cfg.dgp, "linear | logit-het | qr-shift")->required();
    syn->add_option("--n", cfg.n, "Rows")->capture_default_str();
    syn->add_option("--seed", cfg.seed, "Seed")->capture_default_str();
    syn->add_option("--output,-o", cfg.output, "Output CSV (default: stdout)");

    std::vector<std::string> args;
    for (int k = argc - 1; k > 0; --k) args.emplace_back(argv[k]);
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        throw HelpRequest(app.help());
    }
    if (spe->parsed()) cfg.command = Command::spe;
    else if (ca->parsed()) cfg.command = Command::ca;
    else if (subpop->parsed()) cfg.command = Command::subpop;
    else cfg.command = Command::synth;
    return cfg;
}

void run(const RunConfig& config, std::ostream& log) {
    Context ctx(config, log);
    if (config.command != Command::synth) {
        std::error_code ec;
        fs::create_directories(config.out_dir, ec);
        if (ec) throw Error(ErrorCategory::io, "cannot create output directory " + config.out_dir + ": " + ec.message());
    }
    switch (config.command) {
        case Command::spe: run_spe(ctx); break;
        case Command::ca: run_ca(ctx); break;
        case Command::subpop: run_subpop(ctx); break;
        case Command::synth: run_synth(ctx); break;
    }
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    auto report = [&](const std::string& category, const std::string& message, int code) {
        json j;
        j["error"] = {{"category", category}, {"message", message}};
        err << j.dump() << '\n';
        return code;
    };
    RunConfig cfg;
    try {
        cfg = parse_command_line(argc, argv);
    } catch (const HelpRequest& h) {
        out << h.what();
        return 0;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << e.what() << '\n';
            return 0;
        }
        return report("config", e.what(), exit_code(ErrorCategory::config));
    } catch (const Error& e) {
        return report(category_name(e.category()), e.what(), exit_code(e.category()));
    }
    try {
        run(cfg, cfg.command == Command::synth ? out : err);
    } catch (const Error& e) {
        return report(category_name(e.category()), e.what(), exit_code(e.category()));
    } catch (const std::exception& e) {
        return report("internal", e.what(), 1);
    }
    return 0;
}

}  // namespace sorted_effects::cli
