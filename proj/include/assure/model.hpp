// model.hpp
//
// Data model for compound selection problems: units (estimate, standard error,
// cost, covariates), datasets, simulation ground truth and the bandwidth.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "assure/detail/format.hpp"
#include "assure/error.hpp"

namespace assure {

enum class Likelihood { gaussian, poisson };

inline const char* to_string(Likelihood m) { return m == Likelihood::gaussian ? "gaussian" : "poisson"; }

/// One decision problem.
struct Unit {
    double y = 0.0;
    double sigma = 1.0;
    double cost = 0.0;
    std::vector<double> covariates;
};

inline bool is_count(double y) { return y >= 0.0 && y == std::floor(y) && y <= 9007199254740992.0; }

/// Ordered, immutable collection of units stored column-wise.
class Dataset {
public:
    static constexpr std::size_t min_units = 3;

    Dataset(std::vector<double> y, std::vector<double> sigma, std::vector<double> cost,
            std::vector<double> covariates, std::size_t covariate_dim,
            Likelihood mode = Likelihood::gaussian)
        : y_(std::move(y)), sigma_(std::move(sigma)), cost_(std::move(cost)),
          x_(std::move(covariates)), p_(covariate_dim), mode_(mode) {
        validate();
    }

    explicit Dataset(const std::vector<Unit>& units, Likelihood mode = Likelihood::gaussian)
        : p_(units.empty() ? 0 : units.front().covariates.size()), mode_(mode) {
        y_.reserve(units.size());
        for (const Unit& u : units) {
            if (u.covariates.size() != p_)
                throw PreconditionError("all units must share the covariate dimension");
            y_.push_back(u.y);
            sigma_.push_back(u.sigma);
            cost_.push_back(u.cost);
            x_.insert(x_.end(), u.covariates.begin(), u.covariates.end());
        }
        validate();
    }

    std::size_t size() const noexcept { return y_.size(); }
    std::size_t covariate_dim() const noexcept { return p_; }
    Likelihood mode() const noexcept { return mode_; }

    std::span<const double> y() const noexcept { return y_; }
    std::span<const double> sigma() const noexcept { return sigma_; }
    std::span<const double> cost() const noexcept { return cost_; }
    /// Row-major n x p covariate matrix.
    std::span<const double> covariate_matrix() const noexcept { return x_; }
    std::span<const double> covariates(std::size_t i) const noexcept {
        return std::span<const double>(x_).subspan(i * p_, p_);
    }

    Unit unit(std::size_t i) const {
        auto x = covariates(i);
        return {y_[i], sigma_[i], cost_[i], std::vector<double>(x.begin(), x.end())};
    }

    /// Same units with new observations (simulation redraws).
    Dataset with_outcomes(std::vector<double> y) const {
        if (y.size() != size())
            throw PreconditionError("with_outcomes: length mismatch");
        return Dataset(std::move(y), sigma_, cost_, x_, p_, mode_);
    }

    /// Same units with every cost replaced by `k`.
    Dataset with_constant_cost(double k) const {
        return Dataset(y_, sigma_, std::vector<double>(size(), k), x_, p_, mode_);
    }

private:
    void validate() const {
        const std::size_t n = y_.size();
        if (sigma_.size() != n || cost_.size() != n || x_.size() != n * p_)
            throw PreconditionError("dataset columns have inconsistent lengths");
        if (n < min_units)
            throw PreconditionError("dataset needs at least 3 units, got " + std::to_string(n), "too_few_rows");
        for (std::size_t i = 0; i < n; ++i) {
            if (!std::isfinite(y_[i]) || !std::isfinite(cost_[i]))
                throw DomainError("unit " + std::to_string(i) + ": y and cost must be finite");
            if (!(sigma_[i] > 0.0) || !std::isfinite(sigma_[i]))
                throw DomainError("unit " + std::to_string(i) + ": sigma must be positive and finite", "invalid_sigma");
            if (mode_ == Likelihood::poisson && !is_count(y_[i]))
                throw DomainError("unit " + std::to_string(i) + ": poisson y must be a non-negative integer",
                                  "invalid_count");
        }
        for (double v : x_)
            if (!std::isfinite(v))
                throw DomainError("covariates must be finite");
    }

    std::vector<double> y_, sigma_, cost_, x_;
    std::size_t p_ = 0;
    Likelihood mode_ = Likelihood::gaussian;
};

/// True parameters mu_i (simulation only).
struct GroundTruth {
    std::vector<double> mu;

    void check_against(const Dataset& data) const {
        if (mu.size() != data.size())
            throw PreconditionError("ground truth has " + std::to_string(mu.size()) + " entries, dataset has " +
                                        std::to_string(data.size()),
                                    "length_mismatch");
        for (double m : mu)
            if (!std::isfinite(m))
                throw DomainError("ground truth must be finite");
    }
};

struct Bandwidth {
    double h;
    double lambda;

    static Bandwidth fixed(double h) {
        if (!(h > 0.0 && h <= 1.0))
            throw PreconditionError("bandwidth must lie in (0, 1]");
        return {h, 1.0 / h};
    }
};

/// h = 1/sqrt(2 ln n).
inline Bandwidth auto_bandwidth(std::size_t n) {
    if (n < Dataset::min_units)
        throw PreconditionError("auto_bandwidth requires n >= 3");
    const double lambda = std::sqrt(2.0 * std::log(static_cast<double>(n)));
    return {1.0 / lambda, lambda};
}

// ---------------------------------------------------------------------------
// CSV

/// Header plus numeric rows, each row tagged with its 1-based file line.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
    std::vector<std::size_t> lines;

    std::ptrdiff_t column(const std::string& name) const {
        for (std::size_t j = 0; j < header.size(); ++j)
            if (header[j] == name)
                return static_cast<std::ptrdiff_t>(j);
        return -1;
    }

    std::size_t require_column(const std::string& name) const {
        const auto j = column(name);
        if (j < 0)
            throw ParseError("missing_column", 1, "missing required column '" + name + "'");
        return static_cast<std::size_t>(j);
    }
};

namespace detail {

inline std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(trim(line.substr(start)));
            break;
        }
        out.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
    return out;
}

} // namespace detail

inline CsvTable read_csv(std::istream& in) {
    CsvTable t;
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (lineno == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0)
            line.erase(0, 3);
        if (detail::trim(line).empty())
            continue;
        const auto cells = detail::split_commas(line);
        if (!have_header) {
            for (auto c : cells)
                t.header.emplace_back(c);
            have_header = true;
            continue;
        }
        if (cells.size() != t.header.size())
            throw ParseError("malformed_row", lineno,
                             "expected " + std::to_string(t.header.size()) + " fields, found " +
                                 std::to_string(cells.size()));
        std::vector<double> row;
        row.reserve(cells.size());
        for (std::size_t j = 0; j < cells.size(); ++j) {
            const auto v = detail::parse_double(cells[j]);
            if (!v)
                throw ParseError("non_numeric", lineno,
                                 "column '" + t.header[j] + "': '" + std::string(cells[j]) + "' is not a finite number");
            row.push_back(*v);
        }
        t.rows.push_back(std::move(row));
        t.lines.push_back(lineno);
    }
    if (!have_header)
        throw ParseError("missing_header", 0, "input is empty; a header row is required");
    return t;
}

/// Number of contiguous covariate columns x1, x2, ... in the header.
inline std::size_t covariate_columns(const CsvTable& t) {
    std::size_t p = 0;
    std::size_t highest = 0;
    for (const auto& h : t.header) {
        if (h.size() > 1 && h[0] == 'x' && h.find_first_not_of("0123456789", 1) == std::string::npos)
            highest = std::max<std::size_t>(highest, std::stoul(h.substr(1)));
    }
    for (std::size_t j = 1; j <= highest; ++j) {
        if (t.column("x" + std::to_string(j)) < 0)
            throw ParseError("missing_column", 1, "covariate columns must be x1..xp; 'x" + std::to_string(j) + "' is missing");
        ++p;
    }
    return p;
}

/// Reads `y,sigma,k[,x1..xp]`. In poisson mode `sigma` is optional and ignored
/// (set to 1) and y must be a non-negative integer.
inline Dataset load_dataset(std::istream& in, Likelihood mode = Likelihood::gaussian) {
    const CsvTable t = read_csv(in);
    const std::size_t cy = t.require_column("y");
    const std::size_t ck = t.require_column("k");
    const std::ptrdiff_t cs = mode == Likelihood::gaussian ? static_cast<std::ptrdiff_t>(t.require_column("sigma"))
                                                           : t.column("sigma");
    const std::size_t p = covariate_columns(t);
    std::vector<std::size_t> cx;
    for (std::size_t j = 1; j <= p; ++j)
        cx.push_back(static_cast<std::size_t>(t.column("x" + std::to_string(j))));

    const std::size_t n = t.rows.size();
    std::vector<double> y(n), sigma(n, 1.0), cost(n), x(n * p);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& row = t.rows[i];
        y[i] = row[cy];
        cost[i] = row[ck];
        if (mode == Likelihood::gaussian) {
            sigma[i] = row[static_cast<std::size_t>(cs)];
            if (!(sigma[i] > 0.0))
                throw ParseError("invalid_sigma", t.lines[i],
                                 "row " + std::to_string(i + 1) + ": sigma must be > 0, got " +
                                     detail::format_double(sigma[i]));
        } else if (!is_count(y[i])) {
            throw ParseError("invalid_count", t.lines[i],
                             "row " + std::to_string(i + 1) + ": poisson y must be a non-negative integer");
        }
        for (std::size_t j = 0; j < p; ++j)
            x[i * p + j] = row[cx[j]];
    }
    if (n < Dataset::min_units)
        throw ParseError("too_few_rows", 0, "dataset needs at least 3 rows, found " + std::to_string(n));
    return Dataset(std::move(y), std::move(sigma), std::move(cost), std::move(x), p, mode);
}

inline Dataset load_dataset_file(const std::string& path, Likelihood mode = Likelihood::gaussian) {
    std::ifstream in(path);
    if (!in)
        throw Error("io", "cannot open '" + path + "'");
    return load_dataset(in, mode);
}

inline void write_dataset(std::ostream& out, const Dataset& data) {
    out << "y,sigma,k";
    for (std::size_t j = 1; j <= data.covariate_dim(); ++j)
        out << ",x" << j;
    out << '\n';
    for (std::size_t i = 0; i < data.size(); ++i) {
        out << detail::format_double(data.y()[i]) << ',' << detail::format_double(data.sigma()[i]) << ','
            << detail::format_double(data.cost()[i]);
        for (double v : data.covariates(i))
            out << ',' << detail::format_double(v);
        out << '\n';
    }
}

} // namespace assure
