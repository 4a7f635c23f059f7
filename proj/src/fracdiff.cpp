#include "ffdlab/fracdiff.hpp"

#include "ffdlab/csv.hpp"
#include "ffdlab/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ffdlab {

FracdiffWeights generate_weights(double d, double tau, std::size_t max_len) {
    if (!(d >= 0.0) || !std::isfinite(d)) throw Error(ErrorCode::InvalidArgument, "d must be finite and >= 0");
    if (!(tau > 0.0)) throw Error(ErrorCode::InvalidArgument, "tau must be > 0");
    if (max_len < 1) throw Error(ErrorCode::InvalidArgument, "max_len must be >= 1");

    FracdiffWeights out;
    out.d = d;
    out.tau = tau;
    out.weights.push_back(1.0);
    for (std::size_t k = 1;; ++k) {
        const double next = -out.weights.back() * (d - static_cast<double>(k) + 1.0) / static_cast<double>(k);
        if (std::abs(next) < tau) break;
        if (k >= max_len) {
            throw Error(ErrorCode::NonConvergence, "weights still above tau=" + csv::format_double(tau) +
                                                       " after max_len=" + std::to_string(max_len) +
                                                       " terms (d=" + csv::format_double(d) + ")");
        }
        out.weights.push_back(next);
    }
    return out;
}

FracdiffSeries ffd_transform(std::span<const double> series, const FracdiffWeights& weights) {
    if (weights.weights.empty()) throw Error(ErrorCode::InvalidArgument, "empty weight vector");
    const std::size_t width = weights.cutoff();
    if (series.size() <= width) {
        throw Error(ErrorCode::SeriesTooShort, "series length " + std::to_string(series.size()) +
                                                   " does not exceed window l*=" + std::to_string(width));
    }
    FracdiffSeries out;
    out.source_length = series.size();
    out.d = weights.d;
    out.tau = weights.tau;
    out.start_index = width;
    out.values.resize(series.size() - width);
    const auto& w = weights.weights;
    for (std::size_t t = width; t < series.size(); ++t) {
        double acc = 0.0;
        for (std::size_t k = 0; k <= width; ++k) acc += w[k] * series[t - k];
        out.values[t - width] = acc;
    }
    return out;
}

double pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw Error(ErrorCode::LengthMismatch, "pearson inputs differ in length");
    if (a.size() < 3) throw Error(ErrorCode::SeriesTooShort, "need at least 3 aligned points");
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma;
        const double db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa == 0.0 || sbb == 0.0) throw Error(ErrorCode::DegenerateVariance, "constant input to correlation");
    const double r = sab / std::sqrt(saa * sbb);
    return std::clamp(r, -1.0, 1.0);
}

double memory_correlation(std::span<const double> original, const FracdiffSeries& transformed) {
    if (original.size() != transformed.source_length) {
        throw Error(ErrorCode::LengthMismatch, "original series length differs from transform source length");
    }
    return pearson(original.subspan(transformed.start_index), transformed.values);
}

void write_weights_csv(std::ostream& out, const FracdiffWeights& weights) {
    out << "# d=" << csv::format_double(weights.d) << " tau=" << csv::format_double(weights.tau)
        << " cutoff=" << weights.cutoff() << '\n';
    out << "k,weight\n";
    for (std::size_t k = 0; k < weights.weights.size(); ++k) {
        out << k << ',' << csv::format_double(weights.weights[k]) << '\n';
    }
}

}  // namespace ffdlab
