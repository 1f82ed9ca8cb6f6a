#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "ppx/corpus.h"
#include "ppx/errors.h"
#include "ppx/taxonomy.h"

namespace ppx {

struct InstructionRecord {
  std::string instruction;
  std::string input;
  std::string output;  // "; "-joined names in declaration order, or OTHER

  // Bookkeeping, not serialized.
  int level = 1;
  std::string segment_id;
  LabelPath parent;
  size_t source_index = 0;  // position within its per-level export
};

// Level 1: one record per segment. Level k > 1: one record per (segment,
// gold level-(k-1) prefix) that has a gold child at level k.
std::vector<InstructionRecord> export_level_task(const Corpus& c, const Taxonomy& t, int level,
                                                 std::string_view split);

// Concatenation of the per-level exports, shuffled by seed.
std::vector<InstructionRecord> export_multitask(const Corpus& c, const Taxonomy& t,
                                                const std::vector<int>& levels,
                                                std::string_view split, uint64_t seed);

void write_instructions(std::ostream& out, const std::vector<InstructionRecord>& records);
void write_instructions(const std::filesystem::path& path,
                        const std::vector<InstructionRecord>& records);

// "<corpus>.<level|multi>.<split>.inst"
std::string instruction_file_name(std::string_view corpus, std::string_view level_or_multi,
                                  std::string_view split);

}  // namespace ppx
