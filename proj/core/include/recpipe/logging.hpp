#pragma once

#include <cstdio>
#include <string>

namespace recpipe {

// Stage tags match the pipeline order; every console line is prefixed with
// one of them so runs can be grepped by stage.
enum class Stage { Load, Filter, Split, Tune, Eval, Stats, Write, Info };

inline const char* stage_tag(Stage s) {
  switch (s) {
    case Stage::Load: return "LOAD";
    case Stage::Filter: return "FILTER";
    case Stage::Split: return "SPLIT";
    case Stage::Tune: return "TUNE";
    case Stage::Eval: return "EVAL";
    case Stage::Stats: return "STATS";
    case Stage::Write: return "WRITE";
    case Stage::Info: return "INFO";
  }
  return "INFO";
}

inline bool& log_enabled() {
  static bool enabled = true;
  return enabled;
}

inline void log_line(Stage stage, const std::string& msg) {
  if (!log_enabled()) return;
  std::fprintf(stdout, "[%s] %s\n", stage_tag(stage), msg.c_str());
  std::fflush(stdout);
}

inline void warn(const std::string& msg) {
  if (!log_enabled()) return;
  std::fprintf(stdout, "[WARN] %s\n", msg.c_str());
  std::fflush(stdout);
}

}  // namespace recpipe
