#include "sorted_effects/cli/synth.hpp"

#include "sorted_effects/cli/table_io.hpp"
#include "sorted_effects/error.hpp"
#include "sorted_effects/models.hpp"
#include "sorted_effects/rng.hpp"

#include <sstream>

namespace sorted_effects::cli {

namespace {

// Separates the data stream from bootstrap streams that share the seed.
constexpr std::uint64_t synth_stream = 0x5eed'da7aULL << 32;

}  // namespace

std::vector<std::string> synth_names() { return {"linear", "logit-het", "qr-shift"}; }

SynthModel synth_model(std::string_view dgp) {
    if (dgp == "linear") return {"y ~ t + x1", "t", "ols"};
    if (dgp == "logit-het") return {"y ~ d * x", "d", "logit"};
    if (dgp == "qr-shift") return {"y ~ t + x", "t", "qr"};
    throw Error(ErrorCategory::config, "unknown synthetic design '" + std::string(dgp) + "'");
}

Dataset synth(std::string_view dgp, std::size_t n, std::uint64_t seed) {
    synth_model(dgp);
    if (n < 2) throw Error(ErrorCategory::config, "synthetic sample size must be at least 2");
    Philox4x32 rng(seed, synth_stream);
    Dataset data;
    std::vector<double> y(n), pe(n);
    if (dgp == "linear") {
        std::vector<double> t(n), x1(n);
        for (std::size_t i = 0; i < n; ++i) {
            t[i] = rng.uniform() < 0.5 ? 1.0 : 0.0;
            x1[i] = rng.normal();
            y[i] = 1.0 + 0.5 * t[i] + 0.5 * x1[i] + rng.normal();
            pe[i] = 0.5;
        }
        data.add_numeric("y", y);
        data.add_numeric("t", t);
        data.add_numeric("x1", x1);
    } else if (dgp == "logit-het") {
        std::vector<double> d(n), x(n);
        for (std::size_t i = 0; i < n; ++i) {
            d[i] = rng.uniform() < 0.5 ? 1.0 : 0.0;
            x[i] = 2.0 * rng.uniform();
            const double p = logistic(-1.0 + 1.5 * d[i] * x[i]);
            y[i] = rng.uniform() < p ? 1.0 : 0.0;
            pe[i] = logistic(-1.0 + 1.5 * x[i]) - logistic(-1.0);
        }
        data.add_numeric("y", y);
        data.add_numeric("d", d);
        data.add_numeric("x", x);
    } else {
        std::vector<double> t(n), x(n);
        for (std::size_t i = 0; i < n; ++i) {
            t[i] = rng.uniform() < 0.5 ? 1.0 : 0.0;
            x[i] = 2.0 * rng.uniform();
            y[i] = 1.0 + 0.5 * t[i] + x[i] + rng.normal();
            pe[i] = 0.5;
        }
        data.add_numeric("y", y);
        data.add_numeric("t", t);
        data.add_numeric("x", x);
    }
    data.add_numeric("true_pe", pe);
    return data;
}

std::string dataset_csv(const Dataset& data) {
    std::ostringstream out;
    write_csv_row(out, data.column_names());
    std::vector<std::string> cells(data.cols());
    for (std::size_t r = 0; r < data.rows(); ++r) {
        for (std::size_t c = 0; c < data.cols(); ++c) cells[c] = data.column(c).cell_text(r);
        write_csv_row(out, cells);
    }
    return out.str();
}

}  // namespace sorted_effects::cli
