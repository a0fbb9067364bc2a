#include <algorithm>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "recpipe/errors.hpp"
#include "recpipe/experiment.hpp"
#include "recpipe/logging.hpp"

namespace recpipe {

namespace {

std::string format_g10(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return std::string(buf);
}

std::ofstream open_report(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write report file: " + path.string());
  return out;
}

// Worst p-value of `model` against every other model under the preferred
// test; no value when any pairing is missing.
std::optional<double> worst_pairwise_p(const ExperimentResult& result, const std::string& model,
                                       const std::string& metric, int cutoff) {
  const std::string preferred = result.resolved.evaluation.wilcoxon_test ? "wilcoxon" : "paired_t";
  std::size_t others = 0;
  for (const auto& m : result.models) {
    if (!m.failed && m.name != model) ++others;
  }
  if (others == 0) return std::nullopt;
  double worst = 0.0;
  std::size_t found = 0;
  for (const auto& t : result.stats) {
    if (t.test != preferred || t.metric != metric || t.cutoff != cutoff) continue;
    if (t.model_a != model && t.model_b != model) continue;
    worst = std::max(worst, t.outcome.p_value);
    ++found;
  }
  if (found != others) return std::nullopt;
  return worst;
}

// dagger (p <= 0.05) / double dagger (p <= 0.001) against all other models
std::string significance_mark(const ExperimentResult& result, const std::string& model,
                              const std::string& metric, int cutoff) {
  if (!result.resolved.evaluation.wilcoxon_test && !result.resolved.evaluation.paired_ttest) {
    return "";
  }
  const MetricInfo* info = metric_info(metric);
  if (!info || !info->per_user) return "";
  const auto p = worst_pairwise_p(result, model, metric, cutoff);
  if (!p) return "";
  if (*p <= 0.001) return "\xE2\x80\xA1";  // double dagger
  if (*p <= 0.05) return "\xE2\x80\xA0";   // dagger
  return "";
}

std::string cell_text(const ExperimentResult& result, const ModelOutcome& model,
                      const std::string& label, int cutoff) {
  if (model.failed) return "NA";
  const auto metric_it = model.report.find(label);
  if (metric_it == model.report.end()) return "NA";
  const auto cutoff_it = metric_it->second.find(cutoff);
  if (cutoff_it == metric_it->second.end() || cutoff_it->second.absent) return "NA";
  return format_g10(cutoff_it->second.value) +
         significance_mark(result, model.name, label, cutoff);
}

nlohmann::ordered_json params_json(const Assignment& params) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [name, value] : params) {
    if (const auto* s = std::get_if<std::string>(&value)) {
      j[name] = *s;
    } else {
      j[name] = std::get<double>(value);
    }
  }
  return j;
}

}  // namespace

std::vector<std::filesystem::path> write_reports(const ExperimentResult& result,
                                                 const std::filesystem::path& out_dir) {
  std::vector<std::filesystem::path> manifest;
  try {
    std::filesystem::create_directories(out_dir);
    const auto& eval = result.resolved.evaluation;

    // per-cutoff performance tables
    for (const int k : eval.cutoffs) {
      const std::filesystem::path rel = "performance_cutoff_" + std::to_string(k) + ".tsv";
      auto out = open_report(out_dir / rel);
      out << "Model";
      for (const auto& label : result.metric_labels) out << '\t' << label;
      out << '\n';
      for (const auto& model : result.models) {
        out << model.name;
        for (const auto& label : result.metric_labels) {
          out << '\t' << cell_text(result, model, label, k);
        }
        out << '\n';
      }
      manifest.push_back(rel);
    }

    // triple table
    {
      const std::filesystem::path rel = "performance_triples.tsv";
      auto out = open_report(out_dir / rel);
      out << "Model\tMetric\tValue\n";
      for (const auto& model : result.models) {
        for (const auto& label : result.metric_labels) {
          for (const int k : eval.cutoffs) {
            out << model.name << '\t' << label << '@' << k << '\t';
            if (model.failed) {
              out << "NA";
            } else {
              const auto metric_it = model.report.find(label);
              if (metric_it == model.report.end()) {
                out << "NA";
              } else {
                const auto cutoff_it = metric_it->second.find(k);
                if (cutoff_it == metric_it->second.end() || cutoff_it->second.absent) {
                  out << "NA";
                } else {
                  out << format_g10(cutoff_it->second.value);
                }
              }
            }
            out << '\n';
          }
        }
      }
      manifest.push_back(rel);
    }

    // best hyperparameters
    {
      const std::filesystem::path rel = "best_params.json";
      auto out = open_report(out_dir / rel);
      nlohmann::ordered_json j = nlohmann::ordered_json::object();
      for (const auto& model : result.models) {
        if (model.failed) {
          j[model.name] = {{"error", model.error}};
          continue;
        }
        const Trial& best = model.trials[model.best_trial];
        nlohmann::ordered_json entry;
        entry["params"] = params_json(best.params);
        entry["validation_metric"] = model.config.meta.validation_metric.text();
        entry["objective"] = best.objective;
        j[model.name] = std::move(entry);
      }
      out << j.dump(2) << '\n';
      manifest.push_back(rel);
    }

    // recommendation lists, sorted by user id then descending score
    for (const auto& model : result.models) {
      if (model.failed || !model.config.meta.save_recs) continue;
      std::filesystem::create_directories(out_dir / "recs");
      const std::filesystem::path rel = std::filesystem::path("recs") / (model.name + ".tsv");
      auto out = open_report(out_dir / rel);
      std::vector<std::size_t> order(model.lists.users.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return result.base.user_ids()[model.lists.users[a]] <
               result.base.user_ids()[model.lists.users[b]];
      });
      for (const std::size_t idx : order) {
        const std::string& user = result.base.user_ids()[model.lists.users[idx]];
        for (const auto& entry : model.lists.lists[idx]) {
          out << user << '\t' << result.base.item_ids()[entry.item] << '\t'
              << format_g10(entry.score) << '\n';
        }
      }
      manifest.push_back(rel);
    }

    // statistical tests, one file per metric/cutoff
    if (!result.stats.empty()) {
      for (const auto& label : result.metric_labels) {
        for (const int k : eval.cutoffs) {
          std::vector<const TestResult*> rows;
          for (const auto& t : result.stats) {
            if (t.metric == label && t.cutoff == k) rows.push_back(&t);
          }
          if (rows.empty()) continue;
          const std::filesystem::path rel =
              "stats_" + label + "@" + std::to_string(k) + ".tsv";
          auto out = open_report(out_dir / rel);
          out << "model_a\tmodel_b\ttest\tstatistic\tp_value\tn\n";
          for (const TestResult* t : rows) {
            out << t->model_a << '\t' << t->model_b << '\t' << t->test << '\t'
                << format_g10(t->outcome.statistic) << '\t' << format_g10(t->outcome.p_value)
                << '\t' << t->outcome.n << '\n';
          }
          manifest.push_back(rel);
        }
      }
    }

    // resolved configuration snapshot
    {
      const std::filesystem::path rel = "experiment_snapshot.yml";
      auto out = open_report(out_dir / rel);
      out << render_config(result.resolved);
      manifest.push_back(rel);
    }
  } catch (const std::exception& e) {
    std::string written;
    for (const auto& p : manifest) written += (written.empty() ? "" : ", ") + p.string();
    throw Error(std::string("report writing aborted: ") + e.what() +
                (written.empty() ? "" : "; written so far: " + written));
  }

  for (const auto& rel : manifest) log_line(Stage::Write, (out_dir / rel).string());
  return manifest;
}

}  // namespace recpipe
