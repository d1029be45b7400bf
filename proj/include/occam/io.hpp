#pragma once

// File formats: p-value CSV input, prior weight tables, and JSON / CSV
// reports. Reports print every floating-point value with 12 significant
// digits and emit fields in a fixed order, so identical runs produce
// byte-identical files.

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "bounds.hpp"
#include "error.hpp"
#include "multitest.hpp"
#include "priors.hpp"
#include "sharpness.hpp"
#include "simulate.hpp"

namespace occam::io {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// number formatting

/// 12-significant-digit decimal text.
inline std::string fmt12(double x)
{
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (std::isnan(x)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

/// x rounded to 12 significant digits, for JSON output (nlohmann then prints
/// the shortest text that reads back as that value).
inline Json num12(double x)
{
    if (!std::isfinite(x)) return nullptr;
    return std::strtod(fmt12(x).c_str(), nullptr);
}

/// Shortest text that parses back to exactly x.
inline std::string fmt_exact(double x)
{
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------
// CSV reading

namespace detail {

inline std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

inline std::string where(const std::string& source, std::size_t line)
{
    return source + ":" + std::to_string(line);
}

inline double parse_double(std::string_view text, const std::string& context)
{
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    OCCAM_REQUIRE(res.ec == std::errc() && res.ptr == text.data() + text.size() && !text.empty(), ErrorKind::Parse,
                  context + ": not a number: '" + std::string(text) + "'");
    return v;
}

inline long long parse_int(std::string_view text, const std::string& context)
{
    long long v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    OCCAM_REQUIRE(res.ec == std::errc() && res.ptr == text.data() + text.size() && !text.empty(), ErrorKind::Parse,
                  context + ": not an integer: '" + std::string(text) + "'");
    return v;
}

// Data rows (non-blank lines after the header) with their 1-based line numbers.
struct Table {
    std::vector<std::string_view> header;
    std::vector<std::pair<std::size_t, std::vector<std::string_view>>> rows;
    std::string text; // owns the views
};

inline Table read_table(std::istream& in, const std::string& source)
{
    Table t;
    std::ostringstream buf;
    buf << in.rdbuf();
    t.text = buf.str();
    std::string_view all = t.text;
    std::size_t line_no = 0;
    bool have_header = false;
    while (!all.empty()) {
        const auto nl = all.find('\n');
        std::string_view line = all.substr(0, nl);
        all = nl == std::string_view::npos ? std::string_view{} : all.substr(nl + 1);
        ++line_no;
        if (trim(line).empty()) continue;
        auto cells = split(line);
        if (!have_header) {
            t.header = std::move(cells);
            have_header = true;
        } else {
            OCCAM_REQUIRE(cells.size() == t.header.size(), ErrorKind::Parse,
                          where(source, line_no) + ": expected " + std::to_string(t.header.size()) + " fields, got " +
                              std::to_string(cells.size()));
            t.rows.emplace_back(line_no, std::move(cells));
        }
    }
    OCCAM_REQUIRE(have_header, ErrorKind::Parse, source + ": missing header");
    return t;
}

inline std::ifstream open_input(const std::string& path)
{
    std::ifstream in(path);
    OCCAM_REQUIRE(in.good(), ErrorKind::InputNotFound, "cannot open '" + path + "'");
    return in;
}

} // namespace detail

struct ParsedPool {
    HypothesisPool pool;
    std::optional<ComplexityPrior> prior; // from the weight column, if present
};

/// Reads `hypothesis_id,p_value[,weight][,is_null]`.
inline ParsedPool parse_pvalue_csv(std::istream& in, const std::string& source = "<input>")
{
    const auto table = detail::read_table(in, source);
    const auto& h = table.header;
    const bool header_ok = h.size() >= 2 && h.size() <= 4 && h[0] == "hypothesis_id" && h[1] == "p_value" &&
                           (h.size() < 3 || h[2] == "weight" || (h.size() == 3 && h[2] == "is_null")) &&
                           (h.size() < 4 || (h[2] == "weight" && h[3] == "is_null"));
    OCCAM_REQUIRE(header_ok, ErrorKind::Parse,
                  source + ":1: header must be hypothesis_id,p_value[,weight][,is_null]");
    const bool has_weight = h.size() >= 3 && h[2] == "weight";
    const bool has_null = h.back() == "is_null";
    OCCAM_REQUIRE(!table.rows.empty(), ErrorKind::EmptyPool, source + ": no data rows");

    std::vector<std::string> ids;
    std::vector<double> p, w;
    std::vector<bool> nulls;
    std::unordered_map<std::string, std::size_t> seen;
    for (const auto& [line, cells] : table.rows) {
        const std::string ctx = detail::where(source, line);
        OCCAM_REQUIRE(!cells[0].empty(), ErrorKind::Parse, ctx + ": empty hypothesis_id");
        std::string id(cells[0]);
        const double pv = detail::parse_double(cells[1], ctx);
        OCCAM_REQUIRE(pv >= 0.0 && pv <= 1.0, ErrorKind::Validation,
                      ctx + ": p_value of '" + id + "' outside [0,1]: " + std::string(cells[1]));
        OCCAM_REQUIRE(seen.emplace(id, line).second, ErrorKind::Duplicate,
                      ctx + ": duplicate hypothesis_id '" + id + "' (first on line " + std::to_string(seen[id]) + ")");
        if (has_weight) {
            const double wv = detail::parse_double(cells[2], ctx);
            OCCAM_REQUIRE(wv >= 0.0, ErrorKind::Validation, ctx + ": negative weight for '" + id + "'");
            w.push_back(wv);
        }
        if (has_null) {
            const auto flag = cells.back();
            OCCAM_REQUIRE(flag == "0" || flag == "1", ErrorKind::Parse, ctx + ": is_null must be 0 or 1");
            nulls.push_back(flag == "1");
        }
        ids.push_back(std::move(id));
        p.push_back(pv);
    }
    ParsedPool out{HypothesisPool(std::move(ids), std::move(p),
                                  has_null ? std::optional<std::vector<bool>>(std::move(nulls)) : std::nullopt),
                   std::nullopt};
    if (has_weight) out.prior = complexity_prior_custom(w);
    return out;
}

inline ParsedPool parse_pvalue_csv(const std::string& path)
{
    auto in = detail::open_input(path);
    return parse_pvalue_csv(in, path);
}

/// Writes a pool back in the input format; values round-trip exactly.
inline void write_pvalue_csv(std::ostream& out, const HypothesisPool& pool, const ComplexityPrior* prior = nullptr)
{
    out << "hypothesis_id,p_value";
    if (prior) out << ",weight";
    if (pool.has_ground_truth()) out << ",is_null";
    out << '\n';
    for (std::size_t i = 0; i < pool.size(); ++i) {
        out << pool.ids()[i] << ',' << fmt_exact(pool.p(i));
        if (prior) out << ',' << fmt_exact((*prior)[i]);
        if (pool.has_ground_truth()) out << ',' << ((*pool.null_mask())[i] ? 1 : 0);
        out << '\n';
    }
}

/// Size prior from `index,weight` rows, index in 1..m; absent indices get 0.
inline SizePrior load_size_prior_csv(std::istream& in, std::size_t m, const std::string& source = "<size prior>")
{
    const auto table = detail::read_table(in, source);
    OCCAM_REQUIRE(table.header.size() == 2 && table.header[0] == "index" && table.header[1] == "weight",
                  ErrorKind::Parse, source + ":1: header must be index,weight");
    std::vector<double> w(m, 0.0);
    for (const auto& [line, cells] : table.rows) {
        const std::string ctx = detail::where(source, line);
        const long long k = detail::parse_int(cells[0], ctx);
        OCCAM_REQUIRE(k >= 1 && static_cast<std::size_t>(k) <= m, ErrorKind::Validation,
                      ctx + ": size index outside 1.." + std::to_string(m));
        w[static_cast<std::size_t>(k - 1)] = detail::parse_double(cells[1], ctx);
    }
    return size_prior_custom(w);
}

/// Complexity prior from `hypothesis_id,weight` rows; pool ids absent from the file get 0.
inline ComplexityPrior load_complexity_prior_csv(std::istream& in, const HypothesisPool& pool,
                                                 const std::string& source = "<complexity prior>")
{
    const auto table = detail::read_table(in, source);
    OCCAM_REQUIRE(table.header.size() == 2 && table.header[0] == "hypothesis_id" && table.header[1] == "weight",
                  ErrorKind::Parse, source + ":1: header must be hypothesis_id,weight");
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < pool.size(); ++i) index.emplace(pool.ids()[i], i);
    std::vector<double> w(pool.size(), 0.0);
    for (const auto& [line, cells] : table.rows) {
        const std::string ctx = detail::where(source, line);
        const auto it = index.find(std::string(cells[0]));
        OCCAM_REQUIRE(it != index.end(), ErrorKind::Validation, ctx + ": unknown hypothesis_id '" + std::string(cells[0]) + "'");
        w[it->second] = detail::parse_double(cells[1], ctx);
    }
    return complexity_prior_custom(w);
}

/// Histogram prior from `x,weight` rows (right bin edge, bin mass).
inline ContinuousPrior load_table_prior_csv(std::istream& in, const std::string& source = "<table prior>")
{
    const auto table = detail::read_table(in, source);
    OCCAM_REQUIRE(table.header.size() == 2 && table.header[0] == "x" && table.header[1] == "weight", ErrorKind::Parse,
                  source + ":1: header must be x,weight");
    std::vector<double> knots, w;
    for (const auto& [line, cells] : table.rows) {
        const std::string ctx = detail::where(source, line);
        knots.push_back(detail::parse_double(cells[0], ctx));
        w.push_back(detail::parse_double(cells[1], ctx));
    }
    return continuous_prior_table(knots, w);
}

template <class Loader, class... Args>
auto load_file(const std::string& path, Loader loader, Args&&... args)
{
    auto in = detail::open_input(path);
    return loader(in, std::forward<Args>(args)..., path);
}

// ---------------------------------------------------------------------------
// reports

inline Json to_json(const StepUpResult& r, const HypothesisPool& pool)
{
    Json j;
    j["procedure"] = r.procedure;
    j["alpha"] = num12(r.alpha);
    j["k_star"] = r.k_star;
    j["kappa_or_beta_spec"] = r.prior_spec;
    j["rejected"] = Json::array();
    for (const auto& id : r.rejected_ids(pool)) j["rejected"].push_back(id);
    j["thresholds"] = Json::object();
    for (std::size_t i = 0; i < pool.size(); ++i) j["thresholds"][pool.ids()[i]] = num12(r.thresholds[i]);
    return j;
}

/// One row per hypothesis: hypothesis_id,p_value,threshold,rejected.
inline std::string to_csv(const StepUpResult& r, const HypothesisPool& pool)
{
    std::vector<bool> rejected(pool.size(), false);
    for (std::size_t i : r.rejected) rejected[i] = true;
    std::ostringstream os;
    os << "hypothesis_id,p_value,threshold,rejected\n";
    for (std::size_t i = 0; i < pool.size(); ++i)
        os << pool.ids()[i] << ',' << fmt12(pool.p(i)) << ',' << fmt12(r.thresholds[i]) << ',' << (rejected[i] ? 1 : 0)
           << '\n';
    return os.str();
}

inline Json to_json(const ClassifierBoundReport& r)
{
    Json j;
    j["n"] = r.n;
    j["delta"] = num12(r.delta);
    j["theta_value"] = num12(r.theta_value);
    j["kl_budget"] = num12(r.kl_budget);
    j["empirical_error"] = num12(r.empirical_error);
    j["upper_error_bound"] = num12(r.upper_error_bound);
    return j;
}

inline Json to_json(const McEstimate& e)
{
    Json j;
    j["trials"] = e.trials;
    j["events"] = e.events;
    j["value"] = num12(e.value);
    j["std_error"] = num12(e.std_error);
    j["seed"] = e.seed;
    return j;
}

inline std::string to_csv(const McEstimate& e)
{
    std::ostringstream os;
    os << "trials,events,value,std_error,seed\n"
       << e.trials << ',' << e.events << ',' << fmt12(e.value) << ',' << fmt12(e.std_error) << ',' << e.seed << '\n';
    return os.str();
}

inline Json to_json(const SharpnessSummary& s)
{
    Json j;
    j["trials"] = s.trials;
    j["degenerate"] = s.degenerate;
    j["mean_fpr"] = num12(s.mean_fpr);
    j["std_error"] = num12(s.std_error);
    j["ks_set_size"] = num12(s.ks_set_size);
    return j;
}

/// Plot-ready per-trial table: trial,x,u,set_size,fpr,degenerate.
inline std::string trials_csv(const SharpnessSummary& s)
{
    std::ostringstream os;
    os << "trial,x,u,set_size,fpr,degenerate\n";
    for (std::size_t i = 0; i < s.per_trial.size(); ++i) {
        const auto& t = s.per_trial[i];
        os << i << ',' << fmt12(t.x) << ',' << fmt12(t.u) << ',' << fmt12(t.set_size) << ',' << fmt12(t.fpr) << ','
           << (t.degenerate ? 1 : 0) << '\n';
    }
    return os.str();
}

inline std::string dump(const Json& j)
{
    return j.dump(2) + "\n";
}

/// Writes `text` to `path`, or to `fallback` when path is empty or "-".
inline void emit_report(const std::string& text, const std::string& path, std::ostream& fallback)
{
    if (path.empty() || path == "-") {
        fallback << text;
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    OCCAM_REQUIRE(out.good(), ErrorKind::Io, "cannot write '" + path + "'");
    out << text;
    out.flush();
    OCCAM_REQUIRE(out.good(), ErrorKind::Io, "write to '" + path + "' failed");
}

} // namespace occam::io
