#pragma once

#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pad/eval/metrics.hpp"

namespace pad {

inline constexpr int kReportSchemaVersion = 1;

struct SliceResult {
  ConfusionCounts counts;
  ErrorRates rates;

  friend bool operator==(const SliceResult&, const SliceResult&) = default;
};

struct ReportRow {
  std::string method;  // Depth | Illuminant | Saliency | Fused
  ConfusionCounts counts;
  ErrorRates rates;
  double threshold = 0.5;
  // One entry per attack type of the report; nullopt renders as "-".
  std::map<std::string, std::optional<SliceResult>> slices;

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

struct ProtocolSummary {
  std::string mode;
  std::vector<std::string> train_datasets;
  std::string test_dataset;
  std::string dev_source;
  std::string fusion_mode;

  friend bool operator==(const ProtocolSummary&, const ProtocolSummary&) = default;
};

struct EvalReport {
  int schema_version = kReportSchemaVersion;
  ProtocolSummary protocol;
  std::vector<std::string> attack_types;
  std::vector<ReportRow> rows;
  std::uint64_t seed = 0;
  std::string config_digest;
  std::uint64_t n_test = 0;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

enum class ReportFormat { text, csv, json };

inline nlohmann::json to_json(const ConfusionCounts& c) {
  return {{"attacks_total", c.attacks_total},
          {"attacks_accepted", c.attacks_accepted},
          {"bonafide_total", c.bonafide_total},
          {"bonafide_rejected", c.bonafide_rejected}};
}

inline nlohmann::json to_json(const ErrorRates& r) {
  return {{"hter", r.hter}, {"apcer", r.apcer}, {"bpcer", r.bpcer}};
}

inline nlohmann::json to_json(const EvalReport& rep) {
  nlohmann::json j;
  j["schema_version"] = rep.schema_version;
  j["protocol"] = {{"mode", rep.protocol.mode},
                   {"train_datasets", rep.protocol.train_datasets},
                   {"test_dataset", rep.protocol.test_dataset},
                   {"dev_source", rep.protocol.dev_source},
                   {"fusion_mode", rep.protocol.fusion_mode}};
  j["attack_types"] = rep.attack_types;
  j["seed"] = rep.seed;
  j["config_digest"] = rep.config_digest;
  j["n_test"] = rep.n_test;
  auto rows = nlohmann::json::array();
  for (const auto& r : rep.rows) {
    nlohmann::json row{{"method", r.method},
                       {"counts", to_json(r.counts)},
                       {"rates", to_json(r.rates)},
                       {"threshold", r.threshold}};
    nlohmann::json slices = nlohmann::json::object();
    for (const auto& [type, s] : r.slices)
      slices[type] = s ? nlohmann::json{{"counts", to_json(s->counts)}, {"rates", to_json(s->rates)}}
                       : nlohmann::json(nullptr);
    row["slices"] = slices;
    rows.push_back(row);
  }
  j["rows"] = rows;
  return j;
}

namespace detail {

inline ConfusionCounts counts_from_json(const nlohmann::json& j) {
  return {j.at("attacks_total").get<std::uint64_t>(), j.at("attacks_accepted").get<std::uint64_t>(),
          j.at("bonafide_total").get<std::uint64_t>(), j.at("bonafide_rejected").get<std::uint64_t>()};
}

inline ErrorRates rates_from_json(const nlohmann::json& j) {
  return {j.at("apcer").get<double>(), j.at("bpcer").get<double>(), j.at("hter").get<double>()};
}

}  // namespace detail

inline EvalReport report_from_json(const nlohmann::json& j) {
  try {
    EvalReport rep;
    rep.schema_version = j.at("schema_version").get<int>();
    if (rep.schema_version != kReportSchemaVersion)
      throw data_error("unsupported report schema version " + std::to_string(rep.schema_version));
    const auto& p = j.at("protocol");
    rep.protocol.mode = p.at("mode").get<std::string>();
    rep.protocol.train_datasets = p.at("train_datasets").get<std::vector<std::string>>();
    rep.protocol.test_dataset = p.at("test_dataset").get<std::string>();
    rep.protocol.dev_source = p.at("dev_source").get<std::string>();
    rep.protocol.fusion_mode = p.at("fusion_mode").get<std::string>();
    rep.attack_types = j.at("attack_types").get<std::vector<std::string>>();
    rep.seed = j.at("seed").get<std::uint64_t>();
    rep.config_digest = j.at("config_digest").get<std::string>();
    rep.n_test = j.at("n_test").get<std::uint64_t>();
    for (const auto& r : j.at("rows")) {
      ReportRow row;
      row.method = r.at("method").get<std::string>();
      row.counts = detail::counts_from_json(r.at("counts"));
      row.rates = detail::rates_from_json(r.at("rates"));
      row.threshold = r.at("threshold").get<double>();
      for (const auto& [type, s] : r.at("slices").items())
        row.slices[type] = s.is_null() ? std::nullopt
                                       : std::optional<SliceResult>(SliceResult{
                                             detail::counts_from_json(s.at("counts")),
                                             detail::rates_from_json(s.at("rates"))});
      rep.rows.push_back(std::move(row));
    }
    return rep;
  } catch (const nlohmann::json::exception& e) {
    throw data_error(std::string("malformed report JSON: ") + e.what());
  }
}

inline std::string format_percent(double rate) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", rate * 100.0);
  return buf;
}

inline std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Text layout: one row per method; per-attack-type HTER columns, then the
// pooled Overall HTER and its APCER / BPCER. Percentages, 2 decimals.
inline std::string render_text(const EvalReport& rep) {
  std::vector<std::string> header{"Method"};
  for (const auto& t : rep.attack_types) header.push_back(t);
  for (const char* h : {"Overall", "APCER", "BPCER"}) header.push_back(h);
  std::vector<std::vector<std::string>> cells{header};
  for (const auto& r : rep.rows) {
    std::vector<std::string> line{r.method};
    for (const auto& t : rep.attack_types) {
      auto it = r.slices.find(t);
      line.push_back(it != r.slices.end() && it->second ? format_percent(it->second->rates.hter)
                                                        : "-");
    }
    line.push_back(format_percent(r.rates.hter));
    line.push_back(format_percent(r.rates.apcer));
    line.push_back(format_percent(r.rates.bpcer));
    cells.push_back(line);
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& line : cells)
    for (std::size_t i = 0; i < line.size(); ++i) width[i] = std::max(width[i], line[i].size());

  std::size_t total_width = 2 * (width.size() - 1);
  for (auto w : width) total_width += w;

  std::ostringstream os;
  os << "Protocol: " << rep.protocol.mode << ", train {";
  for (std::size_t i = 0; i < rep.protocol.train_datasets.size(); ++i)
    os << (i ? ", " : "") << rep.protocol.train_datasets[i];
  os << "}, test " << rep.protocol.test_dataset << ", dev " << rep.protocol.dev_source
     << ", fusion " << rep.protocol.fusion_mode << "\n";
  os << "Results in %; Overall pools all attack types (alias: All)\n";
  for (std::size_t li = 0; li < cells.size(); ++li) {
    for (std::size_t i = 0; i < cells[li].size(); ++i) {
      const auto& c = cells[li][i];
      if (i == 0)
        os << c << std::string(width[i] - c.size(), ' ');
      else
        os << "  " << std::string(width[i] - c.size(), ' ') << c;
    }
    os << "\n";
    if (li == 0) os << std::string(total_width, '-') << "\n";
  }
  os << "seed " << rep.seed << ", config " << rep.config_digest << ", n_test " << rep.n_test << "\n";
  return os.str();
}

inline std::string render_csv(const EvalReport& rep) {
  std::ostringstream os;
  os << "method,attack_type,hter,apcer,bpcer,threshold,n_test,seed\n";
  for (const auto& r : rep.rows) {
    os << r.method << ",all," << format_full(r.rates.hter) << ',' << format_full(r.rates.apcer)
       << ',' << format_full(r.rates.bpcer) << ',' << format_full(r.threshold) << ','
       << (r.counts.attacks_total + r.counts.bonafide_total) << ',' << rep.seed << "\n";
    for (const auto& t : rep.attack_types) {
      auto it = r.slices.find(t);
      if (it == r.slices.end() || !it->second) {
        os << r.method << ',' << t << ",,,," << format_full(r.threshold) << ",0," << rep.seed
           << "\n";
        continue;
      }
      const auto& s = *it->second;
      os << r.method << ',' << t << ',' << format_full(s.rates.hter) << ','
         << format_full(s.rates.apcer) << ',' << format_full(s.rates.bpcer) << ','
         << format_full(r.threshold) << ',' << (s.counts.attacks_total + s.counts.bonafide_total)
         << ',' << rep.seed << "\n";
    }
  }
  return os.str();
}

inline std::string render_report(const EvalReport& rep, ReportFormat format) {
  switch (format) {
    case ReportFormat::text: return render_text(rep);
    case ReportFormat::csv: return render_csv(rep);
    case ReportFormat::json: return to_json(rep).dump(2) + "\n";
  }
  return {};
}

inline ReportFormat report_format_from_string(const std::string& s) {
  if (s == "text") return ReportFormat::text;
  if (s == "csv") return ReportFormat::csv;
  if (s == "json") return ReportFormat::json;
  throw usage_error("unknown format '" + s + "' (expected text, csv or json)");
}

}  // namespace pad
