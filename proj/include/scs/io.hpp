#pragma once

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "scs/bounds.hpp"
#include "scs/nls.hpp"
#include "scs/sensing.hpp"
#include "scs/signal.hpp"
#include "scs/solver.hpp"

namespace scs {

// Container layout, shared by SCSX (signal), SCSY (measurement) and SCSM
// (mask) files: a 16-byte header -- magic[4], version u8, tag u8, n_x u32,
// n_y u32, B u16 -- followed by little-endian f64 samples in pixel-major,
// frame-minor order. The tag byte carries the mask distribution for SCSM
// and the normalized flag for SCSX.
inline constexpr std::uint8_t kContainerVersion = 1;

namespace detail {

static_assert(std::endian::native == std::endian::little,
              "container code assumes a little-endian host");

inline void put_u16(std::string& out, std::uint16_t v) {
    out.push_back(char(v & 0xff));
    out.push_back(char((v >> 8) & 0xff));
}

inline void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(char((v >> (8 * i)) & 0xff));
}

inline void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(char((v >> (8 * i)) & 0xff));
}

inline void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

class ByteReader {
public:
    ByteReader(std::string data, std::string path)
        : data_(std::move(data)), path_(std::move(path)) {}

    std::uint8_t u8() { return static_cast<std::uint8_t>(take(1)[0]); }
    std::uint16_t u16() {
        const auto* p = take(2);
        return std::uint16_t(std::uint8_t(p[0])) | std::uint16_t(std::uint8_t(p[1])) << 8;
    }
    std::uint32_t u32() {
        const auto* p = take(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t(std::uint8_t(p[i])) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        const auto* p = take(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t(std::uint8_t(p[i])) << (8 * i);
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string magic() { return std::string(take(4), 4); }
    bool exhausted() const { return pos_ == data_.size(); }

private:
    const char* take(std::size_t count) {
        if (pos_ + count > data_.size())
            throw IoError("truncated file: " + path_);
        const char* p = data_.data() + pos_;
        pos_ += count;
        return p;
    }

    std::string data_;
    std::string path_;
    std::size_t pos_ = 0;
};

inline void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failure: " + path);
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

inline std::string container_bytes(const char* magic, std::uint8_t tag, std::size_t nx,
                                   std::size_t ny, std::size_t frames,
                                   const std::vector<double>& samples) {
    std::string out;
    out.reserve(16 + samples.size() * 8);
    out.append(magic, 4);
    out.push_back(char(kContainerVersion));
    out.push_back(char(tag));
    put_u32(out, static_cast<std::uint32_t>(nx));
    put_u32(out, static_cast<std::uint32_t>(ny));
    put_u16(out, static_cast<std::uint16_t>(frames));
    for (double v : samples) put_f64(out, v);
    return out;
}

struct ContainerData {
    std::uint8_t tag = 0;
    std::size_t nx = 0, ny = 0, frames = 0;
    std::vector<double> samples;
};

inline ContainerData read_container(const std::string& path, const char* expected_magic) {
    ByteReader reader(read_file(path), path);
    if (reader.magic() != std::string(expected_magic, 4))
        throw IoError("bad magic (expected " + std::string(expected_magic, 4) + "): " + path);
    if (reader.u8() != kContainerVersion) throw IoError("unsupported container version: " + path);
    ContainerData data;
    data.tag = reader.u8();
    data.nx = reader.u32();
    data.ny = reader.u32();
    data.frames = reader.u16();
    if (data.nx == 0 || data.ny == 0 || data.frames == 0)
        throw IoError("degenerate container shape: " + path);
    const std::size_t total = data.nx * data.ny * data.frames;
    data.samples.resize(total);
    for (std::size_t i = 0; i < total; ++i) data.samples[i] = reader.f64();
    if (!reader.exhausted()) throw IoError("trailing bytes: " + path);
    return data;
}

// Shortest round-trip decimal form; "inf"/"-inf"/"nan" for non-finite.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

} // namespace detail

inline void write_signal(const std::string& path, const MultiFrameSignal& x) {
    detail::write_file(path, detail::container_bytes("SCSX", x.normalized ? 1 : 0, x.nx(), x.ny(),
                                                     x.frames(), x.data.values()));
}

inline MultiFrameSignal read_signal(const std::string& path) {
    const auto data = detail::read_container(path, "SCSX");
    MultiFrameSignal x(data.nx, data.ny, data.frames, data.tag != 0);
    x.data.values() = data.samples;
    return x;
}

inline void write_measurement(const std::string& path, const Measurement& y) {
    detail::write_file(path,
                       detail::container_bytes("SCSY", 0, y.nx(), y.ny(), 1, y.data.values()));
}

inline Measurement read_measurement(const std::string& path) {
    const auto data = detail::read_container(path, "SCSY");
    Measurement y(data.nx, data.ny);
    y.data.values() = data.samples;
    return y;
}

inline void write_masks(const std::string& path, const MaskStack& masks) {
    const std::uint8_t tag = masks.distribution_tag == MaskDistribution::gaussian ? 0 : 1;
    detail::write_file(path, detail::container_bytes("SCSM", tag, masks.nx(), masks.ny(),
                                                     masks.frames(), masks.diag.values()));
}

inline MaskStack read_masks(const std::string& path) {
    const auto data = detail::read_container(path, "SCSM");
    MaskStack masks;
    masks.diag = Tensor({data.nx, data.ny, data.frames});
    masks.diag.values() = data.samples;
    masks.distribution_tag = data.tag == 0 ? MaskDistribution::gaussian : MaskDistribution::bernoulli01;
    masks.recompute_gram();
    return masks;
}

// SCSC: magic, version u8, reserved u8, block_w u16, block_h u16, stride
// u16, group_size u16, search_window u32, keep_per_group u32, n_x u32, n_y
// u32, B u16, Q u32; per group: member count u32, (x u32, y u32) origins,
// coefficient count u32, (u32 flat 4D index, f64 value) pairs.
inline void write_nls_code(const std::string& path, const NlsCode& code) {
    std::string out;
    out.append("SCSC", 4);
    out.push_back(char(kContainerVersion));
    out.push_back(char(0));
    detail::put_u16(out, static_cast<std::uint16_t>(code.params.block_w));
    detail::put_u16(out, static_cast<std::uint16_t>(code.params.block_h));
    detail::put_u16(out, static_cast<std::uint16_t>(code.params.stride));
    detail::put_u16(out, static_cast<std::uint16_t>(code.params.group_size));
    detail::put_u32(out, static_cast<std::uint32_t>(code.params.search_window));
    detail::put_u32(out, static_cast<std::uint32_t>(code.params.keep_per_group));
    detail::put_u32(out, static_cast<std::uint32_t>(code.shape[0]));
    detail::put_u32(out, static_cast<std::uint32_t>(code.shape[1]));
    detail::put_u16(out, static_cast<std::uint16_t>(code.shape[2]));
    detail::put_u32(out, static_cast<std::uint32_t>(code.groups.size()));
    for (const auto& group : code.groups) {
        detail::put_u32(out, static_cast<std::uint32_t>(group.members.size()));
        for (const auto& m : group.members) {
            detail::put_u32(out, m[0]);
            detail::put_u32(out, m[1]);
        }
        detail::put_u32(out, static_cast<std::uint32_t>(group.coeffs.size()));
        for (const auto& [idx, value] : group.coeffs) {
            detail::put_u32(out, idx);
            detail::put_f64(out, value);
        }
    }
    detail::write_file(path, out);
}

inline NlsCode read_nls_code(const std::string& path) {
    detail::ByteReader reader(detail::read_file(path), path);
    if (reader.magic() != "SCSC") throw IoError("bad magic (expected SCSC): " + path);
    if (reader.u8() != kContainerVersion) throw IoError("unsupported container version: " + path);
    reader.u8(); // reserved
    NlsCode code;
    code.params.block_w = reader.u16();
    code.params.block_h = reader.u16();
    code.params.stride = reader.u16();
    code.params.group_size = reader.u16();
    code.params.search_window = reader.u32();
    code.params.keep_per_group = reader.u32();
    code.shape[0] = reader.u32();
    code.shape[1] = reader.u32();
    code.shape[2] = reader.u16();
    const std::uint32_t group_count = reader.u32();
    code.groups.resize(group_count);
    for (auto& group : code.groups) {
        const std::uint32_t members = reader.u32();
        group.members.resize(members);
        for (auto& m : group.members) {
            m[0] = reader.u32();
            m[1] = reader.u32();
        }
        const std::uint32_t coeffs = reader.u32();
        group.coeffs.resize(coeffs);
        for (auto& [idx, value] : group.coeffs) {
            idx = reader.u32();
            value = reader.f64();
        }
    }
    if (!reader.exhausted()) throw IoError("trailing bytes: " + path);
    return code;
}

// ---- PGM (P5, binary, 8- or 16-bit grayscale) ----

struct PgmImage {
    std::size_t width = 0, height = 0;
    std::uint16_t maxval = 255;
    std::vector<std::uint16_t> pixels; // row-major rows of `width`
};

inline PgmImage read_pgm(const std::string& path) {
    const std::string bytes = detail::read_file(path);
    std::size_t pos = 0;
    auto skip_space = [&] {
        while (pos < bytes.size()) {
            if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
                ++pos;
            } else if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else {
                break;
            }
        }
    };
    auto next_int = [&]() -> std::size_t {
        skip_space();
        std::size_t value = 0;
        bool any = false;
        while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
            value = value * 10 + std::size_t(bytes[pos] - '0');
            ++pos;
            any = true;
        }
        if (!any) throw IoError("malformed PGM header: " + path);
        return value;
    };

    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5')
        throw IoError("unsupported image format (want binary PGM P5): " + path);
    pos = 2;
    PgmImage img;
    img.width = next_int();
    img.height = next_int();
    const std::size_t maxval = next_int();
    if (maxval == 0 || maxval > 65535) throw IoError("bad PGM maxval: " + path);
    img.maxval = static_cast<std::uint16_t>(maxval);
    ++pos; // single whitespace after maxval
    const std::size_t count = img.width * img.height;
    const std::size_t bytes_per = maxval > 255 ? 2 : 1;
    if (pos + count * bytes_per > bytes.size()) throw IoError("truncated PGM raster: " + path);
    img.pixels.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        if (bytes_per == 1) {
            img.pixels[i] = std::uint8_t(bytes[pos + i]);
        } else {
            // 16-bit PGM rasters are big-endian
            img.pixels[i] =
                std::uint16_t(std::uint8_t(bytes[pos + 2 * i])) << 8 |
                std::uint16_t(std::uint8_t(bytes[pos + 2 * i + 1]));
        }
    }
    return img;
}

// Values are clipped to [0, 1] and quantized round-half-up to 8 bits.
inline void write_pgm8(const std::string& path, std::size_t width, std::size_t height,
                       const std::vector<double>& values) {
    if (values.size() != width * height) throw ParamError("write_pgm8: size mismatch");
    std::string out = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
    for (double v : values) {
        const double clipped = std::min(1.0, std::max(0.0, v));
        out.push_back(char(static_cast<std::uint8_t>(std::floor(clipped * 255.0 + 0.5))));
    }
    detail::write_file(path, out);
}

// Loads a frame sequence into a normalized multi-frame signal. The pattern
// is either an .scsx container, a single PGM, or a printf-style pattern with
// one integer conversion ("frames/%03d.pgm") expanded from index 0 (or 1)
// upward until a file is missing.
inline MultiFrameSignal load_frames(const std::string& pattern) {
    if (pattern.size() >= 5 && pattern.substr(pattern.size() - 5) == ".scsx")
        return read_signal(pattern);

    std::vector<std::string> paths;
    if (pattern.find('%') == std::string::npos) {
        paths.push_back(pattern);
    } else {
        auto expand = [&pattern](std::size_t index) {
            char buf[4096];
            std::snprintf(buf, sizeof(buf), pattern.c_str(), static_cast<int>(index));
            return std::string(buf);
        };
        std::size_t start = 0;
        if (!std::filesystem::exists(expand(0))) start = 1;
        for (std::size_t b = start; b < start + 65535; ++b) {
            const std::string path = expand(b);
            if (!std::filesystem::exists(path)) break;
            paths.push_back(path);
        }
        if (paths.empty()) throw IoError("no frames match pattern: " + pattern);
    }

    std::vector<PgmImage> images;
    images.reserve(paths.size());
    for (const auto& p : paths) images.push_back(read_pgm(p));
    for (const auto& img : images)
        if (img.width != images[0].width || img.height != images[0].height)
            throw IoError("frame dimension mismatch while loading: " + pattern);

    MultiFrameSignal x(images[0].width, images[0].height, images.size(), true);
    for (std::size_t b = 0; b < images.size(); ++b) {
        const double scale = 1.0 / double(images[b].maxval);
        for (std::size_t row = 0; row < images[b].height; ++row)
            for (std::size_t col = 0; col < images[b].width; ++col)
                x.data(col, row, b) = double(images[b].pixels[row * images[b].width + col]) * scale;
    }
    return x;
}

// ---- run manifests and CSV exports ----

struct RunManifest {
    std::vector<std::pair<std::string, std::string>> entries;

    void set(const std::string& key, const std::string& value) {
        for (auto& [k, v] : entries) {
            if (k == key) {
                v = value;
                return;
            }
        }
        entries.emplace_back(key, value);
    }

    std::optional<std::string> find(const std::string& key) const {
        for (const auto& [k, v] : entries)
            if (k == key) return v;
        return std::nullopt;
    }

    void write(const std::string& path) const {
        std::string out;
        for (const auto& [k, v] : entries) out += k + "=" + v + "\n";
        detail::write_file(path, out);
    }

    static RunManifest read(const std::string& path) {
        RunManifest manifest;
        std::istringstream in(detail::read_file(path));
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos) throw IoError("malformed manifest line in " + path);
            manifest.entries.emplace_back(line.substr(0, eq), line.substr(eq + 1));
        }
        return manifest;
    }
};

inline void write_trace_csv(const std::string& path, const IterationTrace& trace) {
    std::string out = "iter,residual_norm,error_to_reference,chosen_mu,wall_time_s\n";
    for (const auto& rec : trace.records) {
        out += std::to_string(rec.iter) + "," + detail::format_double(rec.residual_norm) + ",";
        if (rec.error_to_reference) out += detail::format_double(*rec.error_to_reference);
        out += "," + detail::format_double(rec.chosen_mu) + "," +
               detail::format_double(rec.wall_time_s) + "\n";
    }
    detail::write_file(path, out);
}

// One header plus exactly B frame rows; overall figures go into a leading
// comment so row counts stay predictable.
inline void write_metrics_csv(const std::string& path, const Metrics& metrics) {
    std::string out = "# mse=" + detail::format_double(metrics.mse) +
                      " psnr_db=" + detail::format_double(metrics.psnr_db) + "\n";
    out += "frame,psnr_db\n";
    for (std::size_t b = 0; b < metrics.per_frame_psnr.size(); ++b)
        out += std::to_string(b) + "," + detail::format_double(metrics.per_frame_psnr[b]) + "\n";
    detail::write_file(path, out);
}

inline void write_report_csv(const std::string& path, const std::vector<TailBoundReport>& reports) {
    std::string out = "experiment,param_json,threshold,empirical_freq,mc_stderr,theoretical_bound,pass\n";
    for (const auto& report : reports) {
        for (const auto& row : report.rows) {
            out += report.experiment + ",\"" + report.params + "\"," +
                   detail::format_double(row.threshold) + "," +
                   detail::format_double(row.empirical_freq) + "," +
                   detail::format_double(row.mc_stderr) + "," +
                   detail::format_double(row.theoretical_bound) + "," +
                   (row.pass ? "1" : "0") + "\n";
        }
    }
    detail::write_file(path, out);
}

// Writes the reconstruction, its iteration trace, optional metrics, 8-bit
// frame previews, and finally the manifest describing them.
inline void save_outputs(const std::string& out_dir, RunManifest& manifest,
                         const MultiFrameSignal& xhat, const IterationTrace& trace,
                         const Metrics* metrics = nullptr) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const std::string recon_path = (fs::path(out_dir) / "recon.scsx").string();
    const std::string trace_path = (fs::path(out_dir) / "trace.csv").string();
    write_signal(recon_path, xhat);
    write_trace_csv(trace_path, trace);
    manifest.set("recon", recon_path);
    manifest.set("trace", trace_path);
    if (metrics) {
        const std::string metrics_path = (fs::path(out_dir) / "metrics.csv").string();
        write_metrics_csv(metrics_path, *metrics);
        manifest.set("metrics", metrics_path);
    }
    std::vector<double> frame(xhat.pixels());
    for (std::size_t b = 0; b < xhat.frames(); ++b) {
        for (std::size_t row = 0; row < xhat.ny(); ++row)
            for (std::size_t col = 0; col < xhat.nx(); ++col)
                frame[row * xhat.nx() + col] = xhat.data(col, row, b);
        char name[32];
        std::snprintf(name, sizeof(name), "frame_%03zu.pgm", b);
        write_pgm8((fs::path(out_dir) / name).string(), xhat.nx(), xhat.ny(), frame);
    }
    manifest.set("previews", std::to_string(xhat.frames()));
    manifest.write((fs::path(out_dir) / "manifest.txt").string());
}

} // namespace scs
