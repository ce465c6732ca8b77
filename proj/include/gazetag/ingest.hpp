#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gazetag/core.hpp"

namespace gazetag {

// On-disk formats. All files are UTF-8 with LF line endings and '.' decimal
// separators. Lines starting with '#' are header comments and are skipped.
//
//   gaze / fixation log:  observer_id,image_id,t_ms,x_px,y_px[,duration_ms][,valid]
//   feature channel:      image_id,f0,...,f{D-1}
//   image metadata:       image_id,sam_all,sam_male,sam_female,width_px,height_px
//   scenario list:        one image_id per line
//   observer genders:     observer_id,gender
//
// One schema covers both raw gaze samples and fixation events: a fixation row
// is a gaze row whose t_ms is the onset and whose duration_ms is present.

/// A named per-image feature table: one row of `dim` reals per image.
struct FeatureChannel {
    std::string name;
    std::size_t dim = 0;
    std::vector<std::string> image_ids;  // row order
    std::vector<double> values;          // row-major, image_ids.size() x dim

    std::span<const double> row(std::size_t i) const {
        return std::span<const double>(values).subspan(i * dim, dim);
    }
    std::optional<std::size_t> row_index(std::string_view image_id) const;
};

struct FixationParseResult {
    std::vector<Fixation> fixations;
    std::size_t dropped_rows = 0;  // repeated presentations, invalid-flagged rows
    std::vector<std::string> warnings;
};

/// Parses a raw gaze log. Samples are returned grouped per (observer, image)
/// and time-sorted; rows flagged invalid are kept with valid=false. Rows of
/// one trial must be non-decreasing in t_ms (ValidationError otherwise);
/// trials may interleave freely.
std::vector<GazeSample> parse_gaze_log(const std::filesystem::path& path);

/// Parses a fixation-event log. duration_ms is mandatory here. When the
/// onset clock jumps backwards within one (observer, image) group the
/// remaining rows of that group are treated as a repeated presentation of
/// the same stimulus and dropped with a warning; only the first presentation
/// is kept. Rows flagged invalid are dropped with a warning.
FixationParseResult parse_fixation_log(const std::filesystem::path& path);

/// Loads a feature channel file. The dimension is taken from the header; all
/// rows must match it (and `expected_dim`, when given). No normalization is
/// applied. The channel name is the file stem.
FeatureChannel load_feature_channel(const std::filesystem::path& path,
                                    std::optional<std::size_t> expected_dim = {});

/// Parses image metadata and derives each record's emotion class from its
/// sam_all score. Scenario flags are left unset; apply_scenario() sets them
/// from explicit membership lists.
std::vector<ImageRecord> parse_metadata(const std::filesystem::path& path);

std::vector<std::string> parse_scenario_list(const std::filesystem::path& path);

/// Optional sidecar mapping observer_id -> gender ("male"/"female").
std::map<std::string, std::string> parse_observer_genders(
    const std::filesystem::path& path);

// Writers emit exactly the schemas above; parse(write(x)) == x for every
// well-formed in-memory structure. `header` lines, if any, are emitted as
// leading '#' comments.

void write_gaze_log(const std::filesystem::path& path,
                    std::span<const GazeSample> samples,
                    std::span<const std::string> header = {});
void write_fixation_log(const std::filesystem::path& path,
                        std::span<const Fixation> fixations,
                        std::span<const std::string> header = {});
void write_feature_channel(const std::filesystem::path& path,
                           const FeatureChannel& channel,
                           std::span<const std::string> header = {});
void write_metadata(const std::filesystem::path& path,
                    std::span<const ImageRecord> images,
                    std::span<const std::string> header = {});
void write_scenario_list(const std::filesystem::path& path,
                         std::span<const std::string> image_ids);

/// Shortest round-trip decimal rendering used by every writer.
std::string format_double(double v);

}  // namespace gazetag
