#include "gazetag/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>
#include <tuple>

#include "gazetag/errors.hpp"

namespace gazetag {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

std::vector<std::string> split_csv(std::string_view line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            fields.emplace_back(trim(line.substr(start)));
            break;
        }
        fields.emplace_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
    return fields;
}

double parse_double_field(const std::string& field, const std::string& file,
                          std::size_t line, const char* what) {
    double v = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || field.empty()) {
        throw ParseError(file, line, std::string("malformed ") + what + ": '" + field + "'");
    }
    return v;
}

int parse_int_field(const std::string& field, const std::string& file,
                    std::size_t line, const char* what) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
        throw ParseError(file, line, std::string("malformed ") + what + ": '" + field + "'");
    }
    return v;
}

struct CsvReader {
    explicit CsvReader(const std::filesystem::path& path)
        : file_name(path.string()), in(path) {
        if (!in) throw std::runtime_error("cannot open file: " + file_name);
    }

    // Returns false at EOF. Skips blank and '#' comment lines.
    bool next_row(std::vector<std::string>& fields) {
        std::string line;
        while (std::getline(in, line)) {
            ++line_no;
            std::string_view sv = trim(line);
            if (sv.empty() || sv.front() == '#') continue;
            fields = split_csv(sv);
            return true;
        }
        return false;
    }

    std::string file_name;
    std::ifstream in;
    std::size_t line_no = 0;
};

struct EventColumns {
    int observer = -1, image = -1, t = -1, x = -1, y = -1, duration = -1, valid = -1;
};

EventColumns resolve_event_header(const std::vector<std::string>& header,
                                  const std::string& file, std::size_t line) {
    EventColumns cols;
    for (std::size_t i = 0; i < header.size(); ++i) {
        const std::string& name = header[i];
        int idx = static_cast<int>(i);
        if (name == "observer_id") cols.observer = idx;
        else if (name == "image_id") cols.image = idx;
        else if (name == "t_ms") cols.t = idx;
        else if (name == "x_px") cols.x = idx;
        else if (name == "y_px") cols.y = idx;
        else if (name == "duration_ms") cols.duration = idx;
        else if (name == "valid") cols.valid = idx;
        else throw ParseError(file, line, "unknown column '" + name + "'");
    }
    if (cols.observer < 0 || cols.image < 0 || cols.t < 0 || cols.x < 0 || cols.y < 0) {
        throw ParseError(file, line,
                         "header must name observer_id,image_id,t_ms,x_px,y_px");
    }
    return cols;
}

}  // namespace

std::optional<std::size_t> FeatureChannel::row_index(std::string_view image_id) const {
    for (std::size_t i = 0; i < image_ids.size(); ++i) {
        if (image_ids[i] == image_id) return i;
    }
    return std::nullopt;
}

std::vector<GazeSample> parse_gaze_log(const std::filesystem::path& path) {
    CsvReader reader(path);
    std::vector<std::string> fields;
    if (!reader.next_row(fields)) {
        throw ParseError(reader.file_name, reader.line_no, "missing header row");
    }
    EventColumns cols = resolve_event_header(fields, reader.file_name, reader.line_no);

    using TrialKey = std::pair<std::string, std::string>;
    std::map<TrialKey, std::vector<GazeSample>> trials;
    std::map<TrialKey, std::size_t> last_line;

    while (reader.next_row(fields)) {
        if (static_cast<int>(fields.size()) <= std::max({cols.observer, cols.image,
                                                         cols.t, cols.x, cols.y})) {
            throw ParseError(reader.file_name, reader.line_no, "row has too few columns");
        }
        GazeSample s;
        s.observer_id = fields[cols.observer];
        s.image_id = fields[cols.image];
        s.t_ms = parse_double_field(fields[cols.t], reader.file_name, reader.line_no, "t_ms");
        s.x = parse_double_field(fields[cols.x], reader.file_name, reader.line_no, "x_px");
        s.y = parse_double_field(fields[cols.y], reader.file_name, reader.line_no, "y_px");
        if (cols.valid >= 0 && static_cast<int>(fields.size()) > cols.valid) {
            int v = parse_int_field(fields[cols.valid], reader.file_name, reader.line_no, "valid");
            if (v != 0 && v != 1) {
                throw ParseError(reader.file_name, reader.line_no, "valid flag must be 0 or 1");
            }
            s.valid = v == 1;
        }
        if (s.t_ms < 0.0) {
            throw ParseError(reader.file_name, reader.line_no, "negative timestamp");
        }

        TrialKey key{s.observer_id, s.image_id};
        auto& trial = trials[key];
        if (!trial.empty() && s.t_ms < trial.back().t_ms) {
            throw ValidationError(reader.file_name + ":" + std::to_string(reader.line_no) +
                                  ": non-monotonic timestamps for observer " +
                                  s.observer_id + " on image " + s.image_id +
                                  " (previous row at line " +
                                  std::to_string(last_line[key]) + ")");
        }
        last_line[key] = reader.line_no;
        trial.push_back(std::move(s));
    }

    std::vector<GazeSample> out;
    for (auto& [key, trial] : trials) {
        out.insert(out.end(), std::make_move_iterator(trial.begin()),
                   std::make_move_iterator(trial.end()));
    }
    return out;
}

FixationParseResult parse_fixation_log(const std::filesystem::path& path) {
    CsvReader reader(path);
    std::vector<std::string> fields;
    if (!reader.next_row(fields)) {
        throw ParseError(reader.file_name, reader.line_no, "missing header row");
    }
    EventColumns cols = resolve_event_header(fields, reader.file_name, reader.line_no);
    if (cols.duration < 0) {
        throw ParseError(reader.file_name, reader.line_no,
                         "fixation log requires a duration_ms column");
    }

    using TrialKey = std::pair<std::string, std::string>;
    std::map<TrialKey, std::vector<Fixation>> trials;
    std::map<TrialKey, bool> in_repeat;  // past the first presentation

    FixationParseResult result;

    while (reader.next_row(fields)) {
        if (static_cast<int>(fields.size()) <=
            std::max({cols.observer, cols.image, cols.t, cols.x, cols.y, cols.duration})) {
            throw ParseError(reader.file_name, reader.line_no, "row has too few columns");
        }
        Fixation f;
        f.observer_id = fields[cols.observer];
        f.image_id = fields[cols.image];
        f.onset_ms = parse_double_field(fields[cols.t], reader.file_name, reader.line_no, "t_ms");
        f.x = parse_double_field(fields[cols.x], reader.file_name, reader.line_no, "x_px");
        f.y = parse_double_field(fields[cols.y], reader.file_name, reader.line_no, "y_px");
        f.duration_ms = parse_double_field(fields[cols.duration], reader.file_name,
                                           reader.line_no, "duration_ms");
        if (f.onset_ms < 0.0) {
            throw ParseError(reader.file_name, reader.line_no, "negative onset");
        }
        if (!(f.duration_ms > 0.0)) {
            throw ParseError(reader.file_name, reader.line_no, "non-positive duration");
        }
        if (cols.valid >= 0 && static_cast<int>(fields.size()) > cols.valid) {
            int v = parse_int_field(fields[cols.valid], reader.file_name, reader.line_no, "valid");
            if (v != 0 && v != 1) {
                throw ParseError(reader.file_name, reader.line_no, "valid flag must be 0 or 1");
            }
            if (v == 0) {
                result.dropped_rows += 1;
                continue;
            }
        }

        TrialKey key{f.observer_id, f.image_id};
        auto& trial = trials[key];
        bool& repeat = in_repeat[key];
        if (repeat) {
            result.dropped_rows += 1;
            continue;
        }
        if (!trial.empty() && f.onset_ms < trial.back().onset_ms) {
            repeat = true;
            result.dropped_rows += 1;
            result.warnings.push_back(
                "repeated presentation of image " + f.image_id + " for observer " +
                f.observer_id + " starting at line " + std::to_string(reader.line_no) +
                "; keeping the first presentation only");
            continue;
        }
        trial.push_back(std::move(f));
    }

    for (auto& [key, trial] : trials) {
        result.fixations.insert(result.fixations.end(),
                                std::make_move_iterator(trial.begin()),
                                std::make_move_iterator(trial.end()));
    }
    return result;
}

FeatureChannel load_feature_channel(const std::filesystem::path& path,
                                    std::optional<std::size_t> expected_dim) {
    CsvReader reader(path);
    std::vector<std::string> fields;
    if (!reader.next_row(fields)) {
        throw ParseError(reader.file_name, reader.line_no, "missing header row");
    }
    if (fields.empty() || fields[0] != "image_id" || fields.size() < 2) {
        throw ParseError(reader.file_name, reader.line_no,
                         "feature channel header must be image_id,f0,...");
    }
    FeatureChannel channel;
    channel.name = path.stem().string();
    channel.dim = fields.size() - 1;
    if (expected_dim && channel.dim != *expected_dim) {
        throw ValidationError(reader.file_name + ": channel dimension " +
                              std::to_string(channel.dim) + " does not match expected " +
                              std::to_string(*expected_dim));
    }

    while (reader.next_row(fields)) {
        if (fields.size() != channel.dim + 1) {
            throw ValidationError(reader.file_name + ":" + std::to_string(reader.line_no) +
                                  ": row has " + std::to_string(fields.size() - 1) +
                                  " values, declared dimension is " +
                                  std::to_string(channel.dim));
        }
        channel.image_ids.push_back(fields[0]);
        for (std::size_t i = 1; i < fields.size(); ++i) {
            channel.values.push_back(parse_double_field(fields[i], reader.file_name,
                                                        reader.line_no, "feature value"));
        }
    }

    std::vector<std::string> ids = channel.image_ids;
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
        throw ValidationError(reader.file_name + ": duplicate image_id in channel");
    }
    return channel;
}

std::vector<ImageRecord> parse_metadata(const std::filesystem::path& path) {
    CsvReader reader(path);
    std::vector<std::string> fields;
    if (!reader.next_row(fields)) {
        throw ParseError(reader.file_name, reader.line_no, "missing header row");
    }
    const std::vector<std::string> expected = {"image_id", "sam_all", "sam_male",
                                               "sam_female", "width_px", "height_px"};
    if (fields != expected) {
        throw ParseError(reader.file_name, reader.line_no,
                         "metadata header must be image_id,sam_all,sam_male,"
                         "sam_female,width_px,height_px");
    }

    std::vector<ImageRecord> out;
    while (reader.next_row(fields)) {
        if (fields.size() != expected.size()) {
            throw ParseError(reader.file_name, reader.line_no, "row has wrong column count");
        }
        ImageRecord rec;
        rec.image_id = fields[0];
        rec.sam_all = parse_double_field(fields[1], reader.file_name, reader.line_no, "sam_all");
        rec.sam_male = parse_double_field(fields[2], reader.file_name, reader.line_no, "sam_male");
        rec.sam_female = parse_double_field(fields[3], reader.file_name, reader.line_no, "sam_female");
        rec.width_px = parse_int_field(fields[4], reader.file_name, reader.line_no, "width_px");
        rec.height_px = parse_int_field(fields[5], reader.file_name, reader.line_no, "height_px");
        if (rec.width_px <= 0 || rec.height_px <= 0) {
            throw ParseError(reader.file_name, reader.line_no, "non-positive image size");
        }
        try {
            rec.emotion = label_emotion_class(rec.sam_all);
        } catch (const std::domain_error& e) {
            throw ParseError(reader.file_name, reader.line_no, e.what());
        }
        out.push_back(std::move(rec));
    }
    return out;
}

std::vector<std::string> parse_scenario_list(const std::filesystem::path& path) {
    CsvReader reader(path);
    std::vector<std::string> fields;
    std::vector<std::string> out;
    while (reader.next_row(fields)) {
        if (fields.size() != 1 || fields[0].empty()) {
            throw ParseError(reader.file_name, reader.line_no,
                             "scenario list expects one image_id per line");
        }
        out.push_back(fields[0]);
    }
    return out;
}

std::map<std::string, std::string> parse_observer_genders(
    const std::filesystem::path& path) {
    CsvReader reader(path);
    std::vector<std::string> fields;
    if (!reader.next_row(fields)) {
        throw ParseError(reader.file_name, reader.line_no, "missing header row");
    }
    if (fields != std::vector<std::string>{"observer_id", "gender"}) {
        throw ParseError(reader.file_name, reader.line_no,
                         "gender sidecar header must be observer_id,gender");
    }
    std::map<std::string, std::string> out;
    while (reader.next_row(fields)) {
        if (fields.size() != 2) {
            throw ParseError(reader.file_name, reader.line_no, "row has wrong column count");
        }
        if (fields[1] != "male" && fields[1] != "female") {
            throw ParseError(reader.file_name, reader.line_no,
                             "gender must be 'male' or 'female'");
        }
        out[fields[0]] = fields[1];
    }
    return out;
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) throw std::runtime_error("number formatting failed");
    return std::string(buf, ptr);
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);  // binary: LF line endings everywhere
    if (!out) throw std::runtime_error("cannot write file: " + path.string());
    return out;
}

void write_header_comments(std::ofstream& out, std::span<const std::string> header) {
    for (const std::string& line : header) out << "# " << line << "\n";
}

}  // namespace

void write_gaze_log(const std::filesystem::path& path,
                    std::span<const GazeSample> samples,
                    std::span<const std::string> header) {
    std::ofstream out = open_out(path);
    write_header_comments(out, header);
    out << "observer_id,image_id,t_ms,x_px,y_px,valid\n";
    for (const GazeSample& s : samples) {
        out << s.observer_id << ',' << s.image_id << ',' << format_double(s.t_ms)
            << ',' << format_double(s.x) << ',' << format_double(s.y) << ','
            << (s.valid ? '1' : '0') << '\n';
    }
}

void write_fixation_log(const std::filesystem::path& path,
                        std::span<const Fixation> fixations,
                        std::span<const std::string> header) {
    std::ofstream out = open_out(path);
    write_header_comments(out, header);
    out << "observer_id,image_id,t_ms,x_px,y_px,duration_ms,valid\n";
    for (const Fixation& f : fixations) {
        out << f.observer_id << ',' << f.image_id << ',' << format_double(f.onset_ms)
            << ',' << format_double(f.x) << ',' << format_double(f.y) << ','
            << format_double(f.duration_ms) << ",1\n";
    }
}

void write_feature_channel(const std::filesystem::path& path,
                           const FeatureChannel& channel,
                           std::span<const std::string> header) {
    std::ofstream out = open_out(path);
    write_header_comments(out, header);
    out << "image_id";
    for (std::size_t i = 0; i < channel.dim; ++i) out << ",f" << i;
    out << '\n';
    for (std::size_t r = 0; r < channel.image_ids.size(); ++r) {
        out << channel.image_ids[r];
        for (double v : channel.row(r)) out << ',' << format_double(v);
        out << '\n';
    }
}

void write_metadata(const std::filesystem::path& path,
                    std::span<const ImageRecord> images,
                    std::span<const std::string> header) {
    std::ofstream out = open_out(path);
    write_header_comments(out, header);
    out << "image_id,sam_all,sam_male,sam_female,width_px,height_px\n";
    for (const ImageRecord& rec : images) {
        out << rec.image_id << ',' << format_double(rec.sam_all) << ','
            << format_double(rec.sam_male) << ',' << format_double(rec.sam_female)
            << ',' << rec.width_px << ',' << rec.height_px << '\n';
    }
}

void write_scenario_list(const std::filesystem::path& path,
                         std::span<const std::string> image_ids) {
    std::ofstream out = open_out(path);
    for (const std::string& id : image_ids) out << id << '\n';
}

}  // namespace gazetag
