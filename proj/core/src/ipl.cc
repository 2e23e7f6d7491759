// core/src/ipl.cc

// Copyright 2026  The corpusforge Authors

// See the LICENSE file at the top of the source tree.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "corpusforge/ipl.h"

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <random>
#include <set>
#include <unordered_map>

#include "corpusforge/align.h"
#include "corpusforge/digest.h"
#include "corpusforge/error.h"
#include "corpusforge/fileutil.h"
#include "corpusforge/utf8.h"
#include "json.hpp"

namespace corpusforge {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

TranscriberAdapter parse_adapter_spec(std::string_view spec) {
  TranscriberAdapter adapter;
  auto rest = [&](std::size_t n) { return std::string(spec.substr(n)); };
  if (spec.rfind("cmd:", 0) == 0) {
    adapter.kind = AdapterKind::kExternalCommand;
    adapter.command = rest(4);
    if (adapter.command.empty()) throw ValidationError("adapter: empty command");
  } else if (spec.rfind("precomputed:", 0) == 0) {
    adapter.kind = AdapterKind::kPrecomputedManifest;
    adapter.hypotheses = rest(12);
    if (adapter.hypotheses.empty()) throw ValidationError("adapter: empty path");
  } else if (spec.rfind("mock:", 0) == 0) {
    adapter.kind = AdapterKind::kMockCorruptor;
    const std::string args = rest(5);
    const auto colon = args.find(':');
    try {
      adapter.corruption_rate = std::stod(args.substr(0, colon));
      if (colon != std::string::npos) adapter.seed = std::stoull(args.substr(colon + 1));
    } catch (const std::exception&) {
      throw ValidationError("adapter: expected mock:<rate>[:<seed>], got '" +
                            std::string(spec) + "'");
    }
    if (!(adapter.corruption_rate >= 0.0 && adapter.corruption_rate <= 1.0)) {
      throw ValidationError("adapter: corruption rate must be in [0, 1]");
    }
  } else {
    throw ValidationError("adapter: expected cmd:..., precomputed:... or mock:..., got '" +
                          std::string(spec) + "'");
  }
  return adapter;
}

std::string mock_corrupt(std::string_view text, double rate, std::uint64_t seed) {
  const std::u32string chars = decode_utf8(text);
  std::set<char32_t> letters;
  for (char32_t c : chars) {
    if (!is_space(c)) letters.insert(c);
  }
  if (letters.empty() || rate <= 0.0) return std::string(text);
  const std::vector<char32_t> pool(letters.begin(), letters.end());

  std::mt19937_64 gen(seed);
  auto uniform = [&] { return static_cast<double>(gen() >> 11) * 0x1.0p-53; };
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(uniform() * n); };

  std::u32string out;
  for (char32_t c : chars) {
    if (is_space(c) || uniform() >= rate) {
      out.push_back(c);
      continue;
    }
    switch (pick(3)) {
      case 0:  // substitute
        if (pool.size() > 1) {
          char32_t r = c;
          while (r == c) r = pool[pick(pool.size())];
          out.push_back(r);
        }
        break;
      case 1:  // delete
        break;
      default:  // insert after
        out.push_back(c);
        out.push_back(pool[pick(pool.size())]);
        break;
    }
  }
  auto words = tokenize_words(encode_utf8(out));
  return join_words(words, 0, words.size());
}

namespace {

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out.push_back(c);
    }
  }
  return out + "'";
}

void replace_all(std::string& s, const std::string& from, const std::string& to) {
  for (std::size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos;
       pos += to.size()) {
    s.replace(pos, from.size(), to);
  }
}

std::string sanitize(std::string_view tag) {
  std::string out;
  for (char c : tag) {
    out.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.' ? c : '_');
  }
  return out;
}

std::mutex& command_mutex() {
  static std::mutex m;
  return m;
}

std::unordered_map<std::string, std::string> run_external(
    const TranscriberAdapter& adapter, const std::vector<ManifestRecord>& records) {
  std::lock_guard<std::mutex> lock(command_mutex());
  fs::path dir = adapter.workdir;
  if (dir.empty()) {
    std::string tmpl = (fs::temp_directory_path() / "corpusforge-asr-XXXXXX").string();
    if (::mkdtemp(tmpl.data()) == nullptr) throw Error("cannot create temp directory");
    dir = tmpl;
  }
  fs::create_directories(dir);
  const std::string tag = sanitize(adapter.version_tag);
  const fs::path in = dir / ("asr_in." + tag + ".manifest");
  const fs::path out = dir / ("asr_out." + tag + ".manifest");
  const fs::path err = dir / ("asr_stderr." + tag + ".log");
  std::error_code ec;
  fs::remove(out, ec);
  write_manifest(records, in);

  std::string cmd = adapter.command;
  replace_all(cmd, "{input}", shell_quote(in.string()));
  replace_all(cmd, "{output}", shell_quote(out.string()));
  replace_all(cmd, "{version}", shell_quote(adapter.version_tag));
  const int status = std::system(("(" + cmd + ") 2> " + shell_quote(err.string())).c_str());
  const int code = status == -1 ? -1 : (WIFEXITED(status) ? WEXITSTATUS(status) : 128);
  if (code != 0) {
    std::string diag;
    try {
      diag = read_file(err);
    } catch (const Error&) {
    }
    if (diag.size() > 2000) diag = "..." + diag.substr(diag.size() - 2000);
    throw Error("transcriber command failed with exit code " + std::to_string(code) +
                (diag.empty() ? std::string() : ": " + diag));
  }
  if (!fs::exists(out)) throw Error("transcriber command wrote no output manifest");
  std::unordered_map<std::string, std::string> hyps;
  for (const auto& rec : read_manifest(out)) {
    if (rec.pred_text) hyps.emplace(record_key(rec), *rec.pred_text);
  }
  return hyps;
}

}  // namespace

TranscriptionResult transcribe(const TranscriberAdapter& adapter,
                               const std::vector<ManifestRecord>& records) {
  std::unordered_map<std::string, std::string> lookup;
  if (adapter.kind == AdapterKind::kPrecomputedManifest) {
    for (const auto& h : read_manifest(adapter.hypotheses)) {
      lookup.emplace(record_key(h), h.pred_text.value_or(h.text));
    }
  } else if (adapter.kind == AdapterKind::kExternalCommand) {
    lookup = run_external(adapter, records);
  }

  TranscriptionResult result;
  result.records = records;
  const std::string version = json(adapter.version_tag).dump();
  for (std::size_t i = 0; i < result.records.size(); ++i) {
    auto& rec = result.records[i];
    const std::string key = record_key(rec);
    if (adapter.kind == AdapterKind::kMockCorruptor) {
      rec.pred_text = mock_corrupt(rec.text, adapter.corruption_rate,
                                   derive_seed(adapter.seed, adapter.version_tag + "\n" + key));
    } else if (auto it = lookup.find(key); it != lookup.end()) {
      rec.pred_text = it->second;
    } else {
      rec.pred_text.reset();
      result.missing.push_back(i);
      continue;
    }
    rec.set_extra("asr_version", version);
  }
  return result;
}

void check_ipl_config(const IplConfig& c) {
  if (c.iterations < 1) throw ValidationError("ipl: iterations must be >= 1");
  if (!(c.min_dur >= 0.0 && c.min_dur < c.max_dur)) {
    throw ValidationError("ipl: need 0 <= min_dur < max_dur");
  }
  if (!(c.min_char_rate > 0.0 && c.min_char_rate < c.max_char_rate)) {
    throw ValidationError("ipl: need 0 < min_char_rate < max_char_rate");
  }
  if (!(c.agreement_cer_max >= 0.0)) {
    throw ValidationError("ipl: agreement_cer_max must be >= 0");
  }
  if (!(c.relabel_fraction > 0.0 && c.relabel_fraction <= 1.0)) {
    throw ValidationError("ipl: relabel_fraction must be in (0, 1]");
  }
}

PseudoFilterResult filter_pseudo(const std::vector<ManifestRecord>& current,
                                 const std::map<std::string, std::string>* previous,
                                 const IplConfig& config,
                                 const LanguageProfile& profile) {
  PseudoFilterResult result;
  for (const auto& rec : current) {
    const char* reason = nullptr;
    if (!rec.pred_text) {
      reason = "no_hypothesis";
    } else if (rec.duration < config.min_dur) {
      reason = "min_dur";
    } else if (rec.duration > config.max_dur) {
      reason = "max_dur";
    } else {
      const auto bare = normalize(*rec.pred_text, profile, NormalizationMode::kNoPc);
      const double rate = static_cast<double>(count_code_points(bare)) / rec.duration;
      if (rate < config.min_char_rate || rate > config.max_char_rate) {
        reason = "char_rate";
      } else if (previous != nullptr) {
        auto it = previous->find(record_key(rec));
        if (it != previous->end() &&
            cer(normalize(it->second, profile, NormalizationMode::kNoPc), bare) >
                config.agreement_cer_max) {
          reason = "agreement";
        }
      }
    }
    if (reason == nullptr) {
      result.kept.push_back(rec);
    } else {
      result.dropped.push_back({rec, reason});
    }
  }
  return result;
}

namespace {

struct PoolEntry {
  std::optional<std::string> hypothesis;
  bool transcribed = false;
  bool kept = false;
};

ojson iteration_to_json(const IplIterationReport& r) {
  ojson doc;
  doc["iteration"] = r.iteration;
  doc["adapter_version"] = r.adapter_version;
  doc["labeled_count"] = r.labeled_count;
  doc["labeled_hours"] = r.labeled_hours;
  doc["transcribed"] = r.transcribed;
  doc["kept"] = r.kept;
  doc["dropped"] = r.dropped;
  doc["pseudo_in_manifest"] = r.pseudo_in_manifest;
  doc["pseudo_hours"] = r.pseudo_hours;
  doc["training_hours"] = r.training_hours;
  doc["labeled_to_pseudo_ratio"] = r.labeled_to_pseudo_ratio;
  return doc;
}

IplIterationReport iteration_from_json(const json& doc) {
  IplIterationReport r;
  r.iteration = doc.at("iteration").get<int>();
  r.adapter_version = doc.at("adapter_version").get<std::string>();
  r.labeled_count = doc.at("labeled_count").get<std::size_t>();
  r.labeled_hours = doc.at("labeled_hours").get<double>();
  r.transcribed = doc.at("transcribed").get<std::size_t>();
  r.kept = doc.at("kept").get<std::size_t>();
  r.dropped = doc.at("dropped").get<std::map<std::string, std::size_t>>();
  r.pseudo_in_manifest = doc.at("pseudo_in_manifest").get<std::size_t>();
  r.pseudo_hours = doc.at("pseudo_hours").get<double>();
  r.training_hours = doc.at("training_hours").get<double>();
  r.labeled_to_pseudo_ratio = doc.at("labeled_to_pseudo_ratio").get<double>();
  return r;
}

std::string inputs_fingerprint(const std::vector<ManifestRecord>& labeled,
                               const std::vector<ManifestRecord>& unlabeled,
                               const TranscriberAdapter& adapter,
                               const IplConfig& c) {
  Sha256 h;
  h.update_field(format_manifest(labeled));
  h.update_field(format_manifest(unlabeled));
  h.update_field(std::to_string(static_cast<int>(adapter.kind)));
  h.update_field(adapter.version_tag);
  h.update_field(adapter.command);
  h.update_field(adapter.hypotheses.string());
  ojson params = {c.iterations, c.min_dur, c.max_dur, c.min_char_rate,
                  c.max_char_rate, c.agreement_cer_max, c.relabel_fraction,
                  c.seed, adapter.corruption_rate, adapter.seed};
  h.update_field(params.dump());
  return h.hex_digest();
}

// Seeded choice of `count` positions out of `n`, returned sorted.
std::vector<std::size_t> sample_positions(std::size_t n, std::size_t count,
                                          std::uint64_t seed, int iteration) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 gen(derive_seed(seed, "ipl-relabel-" + std::to_string(iteration)));
  for (std::size_t i = 0; i < count && i + 1 < n; ++i) {
    const std::uint64_t bound = n - i;
    const std::uint64_t reject_below = (0 - bound) % bound;
    std::uint64_t x = gen();
    while (x < reject_below) x = gen();
    std::swap(order[i], order[i + static_cast<std::size_t>(x % bound)]);
  }
  order.resize(count);
  std::sort(order.begin(), order.end());
  return order;
}

}  // namespace

std::string format_ipl_report(const IplReport& report) {
  ojson doc = ojson::array();
  for (const auto& it : report.iterations) doc.push_back(iteration_to_json(it));
  return doc.dump(2, ' ', false, ojson::error_handler_t::strict) + "\n";
}

IplResult run_ipl(const std::vector<ManifestRecord>& labeled,
                  const std::vector<ManifestRecord>& unlabeled,
                  const TranscriberAdapter& adapter, const IplConfig& config,
                  const LanguageProfile& profile) {
  check_ipl_config(config);
  if (labeled.empty()) throw ValidationError("ipl: labeled set is empty");
  {
    std::set<std::string> keys;
    for (const auto& rec : unlabeled) {
      if (!keys.insert(record_key(rec)).second) {
        throw ValidationError("ipl: duplicate unlabeled record " + record_key(rec));
      }
    }
  }

  std::vector<PoolEntry> pool(unlabeled.size());
  IplResult result;
  int completed = 0;
  const bool persist = !config.workdir.empty();
  const fs::path checkpoint_path = config.workdir / "checkpoint.json";
  const std::string fingerprint =
      persist ? inputs_fingerprint(labeled, unlabeled, adapter, config) : std::string();
  auto manifest_path = [&](int it) {
    return config.workdir / ("iter_" + std::to_string(it) + ".manifest");
  };

  if (persist && config.resume && fs::exists(checkpoint_path)) {
    const json doc = json::parse(read_file(checkpoint_path));
    if (doc.at("fingerprint").get<std::string>() != fingerprint) {
      throw ValidationError("ipl: checkpoint in " + config.workdir.string() +
                            " was made with different inputs or settings");
    }
    completed = doc.at("completed").get<int>();
    const auto& entries = doc.at("pool");
    for (std::size_t i = 0; i < pool.size(); ++i) {
      const auto& e = entries.at(i);
      if (!e.at("hypothesis").is_null()) pool[i].hypothesis = e.at("hypothesis").get<std::string>();
      pool[i].transcribed = e.at("transcribed").get<bool>();
      pool[i].kept = e.at("kept").get<bool>();
    }
    for (const auto& r : doc.at("report")) result.report.iterations.push_back(iteration_from_json(r));
    for (int it = 1; it <= std::min(completed, config.iterations); ++it) {
      result.manifests.push_back(read_manifest(manifest_path(it)));
    }
  }

  auto save_checkpoint = [&](int done) {
    ojson doc;
    doc["fingerprint"] = fingerprint;
    doc["completed"] = done;
    ojson entries = ojson::array();
    for (const auto& e : pool) {
      ojson row;
      row["hypothesis"] = e.hypothesis ? ojson(*e.hypothesis) : ojson(nullptr);
      row["transcribed"] = e.transcribed;
      row["kept"] = e.kept;
      entries.push_back(std::move(row));
    }
    doc["pool"] = std::move(entries);
    ojson report = ojson::array();
    for (const auto& r : result.report.iterations) report.push_back(iteration_to_json(r));
    doc["report"] = std::move(report);
    write_file_atomic(checkpoint_path, doc.dump(1) + "\n");
  };

  const double labeled_hours = summarize(labeled).total_hours;
  for (int it = completed + 1; it <= config.iterations; ++it) {
    TranscriberAdapter current = adapter;
    current.version_tag = adapter.version_tag + "@" + std::to_string(it);
    if (persist && current.workdir.empty()) current.workdir = config.workdir / "asr";

    std::vector<std::size_t> fresh;
    std::vector<std::size_t> cached;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      (pool[i].transcribed ? cached : fresh).push_back(i);
    }
    const auto relabel_count = static_cast<std::size_t>(
        std::ceil(config.relabel_fraction * static_cast<double>(cached.size()) - 1e-9));
    std::vector<std::size_t> todo = fresh;
    for (std::size_t pos : sample_positions(cached.size(), relabel_count, config.seed, it)) {
      todo.push_back(cached[pos]);
    }
    std::sort(todo.begin(), todo.end());

    std::vector<ManifestRecord> batch;
    std::map<std::string, std::string> previous;
    for (std::size_t i : todo) {
      batch.push_back(unlabeled[i]);
      if (pool[i].hypothesis) previous.emplace(record_key(unlabeled[i]), *pool[i].hypothesis);
    }

    TranscriptionResult transcribed;
    try {
      transcribed = transcribe(current, batch);
    } catch (const Error& e) {
      throw Error("ipl iteration " + std::to_string(it) + " failed: " + e.what() +
                  (persist ? " (iterations 1.." + std::to_string(it - 1) +
                                 " are checkpointed in " + config.workdir.string() + ")"
                           : std::string()));
    }
    const auto filtered = filter_pseudo(transcribed.records, &previous, config, profile);

    std::set<std::string> kept_keys;
    for (const auto& rec : filtered.kept) kept_keys.insert(record_key(rec));
    for (std::size_t k = 0; k < todo.size(); ++k) {
      auto& entry = pool[todo[k]];
      const auto& rec = transcribed.records[k];
      if (rec.pred_text) {
        entry.hypothesis = rec.pred_text;
        entry.transcribed = true;
      }
      entry.kept = kept_keys.count(record_key(rec)) != 0;
    }

    std::vector<ManifestRecord> pseudo;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (!pool[i].kept) continue;
      ManifestRecord rec = unlabeled[i];
      rec.text = *pool[i].hypothesis;
      rec.pred_text.reset();
      rec.source = "pseudo";
      pseudo.push_back(std::move(rec));
    }
    std::vector<ManifestRecord> manifest = labeled;
    manifest.insert(manifest.end(), pseudo.begin(), pseudo.end());

    IplIterationReport report;
    report.iteration = it;
    report.adapter_version = current.version_tag;
    report.labeled_count = labeled.size();
    report.labeled_hours = labeled_hours;
    report.transcribed = todo.size();
    report.kept = filtered.kept.size();
    for (const auto& d : filtered.dropped) ++report.dropped[d.reason];
    report.pseudo_in_manifest = pseudo.size();
    report.pseudo_hours = summarize(pseudo).total_hours;
    report.training_hours = summarize(manifest).total_hours;
    report.labeled_to_pseudo_ratio =
        report.pseudo_hours > 0.0 ? labeled_hours / report.pseudo_hours : 0.0;
    result.report.iterations.push_back(std::move(report));

    if (persist) {
      write_manifest(manifest, manifest_path(it));
      write_file_atomic(config.workdir / "report.json", format_ipl_report(result.report));
      save_checkpoint(it);
    }
    result.manifests.push_back(std::move(manifest));
  }
  return result;
}

}  // namespace corpusforge
