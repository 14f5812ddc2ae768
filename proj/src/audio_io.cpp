#include "screamloc/audio_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "screamloc/errors.hpp"

namespace screamloc {

void AudioClip::validate() const {
    if (sample_rate_hz <= 0) raise(Errc::invalid_input, "AudioClip: sample rate must be positive");
    for (double s : samples)
        if (!std::isfinite(s)) raise(Errc::invalid_input, "AudioClip: non-finite sample");
}

void MultichannelRecording::validate() const {
    if (channels.size() != channel_ids.size())
        raise(Errc::invalid_input, "MultichannelRecording: ids and channels differ in count");
    if (channels.empty()) raise(Errc::invalid_input, "MultichannelRecording: no channels");
    for (std::size_t i = 0; i < channels.size(); ++i) {
        channels[i].validate();
        if (channels[i].sample_rate_hz != channels[0].sample_rate_hz)
            raise(Errc::rate_mismatch, "MultichannelRecording: mixed sample rates");
        if (channels[i].size() != channels[0].size())
            raise(Errc::length_mismatch, "MultichannelRecording: unequal channel lengths");
        for (std::size_t j = 0; j < i; ++j)
            if (channel_ids[i] == channel_ids[j])
                raise(Errc::invalid_input, "MultichannelRecording: duplicate id " + channel_ids[i]);
    }
}

const AudioClip& MultichannelRecording::channel_by_id(const std::string& id) const {
    for (std::size_t i = 0; i < channel_ids.size(); ++i)
        if (channel_ids[i] == id) return channels[i];
    raise(Errc::id_mismatch, "no channel with id " + id);
}

namespace {

constexpr double kPcm16Scale = 1.0 / 32768.0;

uint32_t read_u32(const unsigned char* p) {
    return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
           (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

uint16_t read_u16(const unsigned char* p) {
    return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::string& s, uint32_t v) {
    s.push_back(static_cast<char>(v & 0xff));
    s.push_back(static_cast<char>((v >> 8) & 0xff));
    s.push_back(static_cast<char>((v >> 16) & 0xff));
    s.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_u16(std::string& s, uint16_t v) {
    s.push_back(static_cast<char>(v & 0xff));
    s.push_back(static_cast<char>((v >> 8) & 0xff));
}

} // namespace

AudioClip load_wav(const std::string& path) {
    if (!std::filesystem::exists(path)) raise(Errc::file_not_found, "no such file: " + path);
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(Errc::file_not_found, "cannot open: " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());

    if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
        std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
        raise(Errc::corrupt_header, "not a RIFF/WAVE file: " + path);

    bool have_fmt = false;
    uint16_t format_code = 0, channels = 0, bits = 0;
    uint32_t rate = 0;
    const unsigned char* data_ptr = nullptr;
    uint32_t data_len = 0;

    std::size_t off = 12;
    while (off + 8 <= bytes.size()) {
        const unsigned char* chunk = bytes.data() + off;
        uint32_t chunk_len = read_u32(chunk + 4);
        if (off + 8 + chunk_len > bytes.size())
            raise(Errc::corrupt_header, "truncated chunk in " + path);
        if (std::memcmp(chunk, "fmt ", 4) == 0) {
            if (chunk_len < 16) raise(Errc::corrupt_header, "fmt chunk too small in " + path);
            format_code = read_u16(chunk + 8);
            channels = read_u16(chunk + 10);
            rate = read_u32(chunk + 12);
            bits = read_u16(chunk + 22);
            have_fmt = true;
        } else if (std::memcmp(chunk, "data", 4) == 0) {
            data_ptr = chunk + 8;
            data_len = chunk_len;
        }
        off += 8 + chunk_len + (chunk_len & 1); // chunks are word-aligned
    }

    if (!have_fmt || !data_ptr) raise(Errc::corrupt_header, "missing fmt/data chunk in " + path);
    if (channels != 1)
        raise(Errc::unsupported_format,
              "expected mono, got " + std::to_string(channels) + " channels: " + path);
    if (rate == 0) raise(Errc::corrupt_header, "zero sample rate in " + path);

    AudioClip clip;
    clip.sample_rate_hz = static_cast<int>(rate);
    if (format_code == 1 && bits == 16) {
        std::size_t n = data_len / 2;
        clip.samples.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            int16_t v = static_cast<int16_t>(read_u16(data_ptr + 2 * i));
            clip.samples[i] = v * kPcm16Scale;
        }
    } else if (format_code == 3 && bits == 32) {
        std::size_t n = data_len / 4;
        clip.samples.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            uint32_t raw = read_u32(data_ptr + 4 * i);
            float f;
            std::memcpy(&f, &raw, 4);
            clip.samples[i] = static_cast<double>(f);
        }
    } else {
        raise(Errc::unsupported_format,
              "unsupported format code " + std::to_string(format_code) + " / " +
                  std::to_string(bits) + " bits: " + path);
    }
    clip.validate();
    return clip;
}

void save_wav(const std::string& path, const AudioClip& clip) {
    clip.validate();
    std::string out;
    const uint32_t n = static_cast<uint32_t>(clip.samples.size());
    const uint32_t data_bytes = n * 2;
    out.reserve(44 + data_bytes);
    out.append("RIFF");
    put_u32(out, 36 + data_bytes);
    out.append("WAVE");
    out.append("fmt ");
    put_u32(out, 16);
    put_u16(out, 1); // PCM
    put_u16(out, 1); // mono
    put_u32(out, static_cast<uint32_t>(clip.sample_rate_hz));
    put_u32(out, static_cast<uint32_t>(clip.sample_rate_hz) * 2); // byte rate
    put_u16(out, 2);                                              // block align
    put_u16(out, 16);                                             // bits
    out.append("data");
    put_u32(out, data_bytes);
    for (double s : clip.samples) {
        double scaled = std::round(s * 32768.0);
        scaled = std::clamp(scaled, -32768.0, 32767.0);
        put_u16(out, static_cast<uint16_t>(static_cast<int16_t>(scaled)));
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) raise(Errc::file_not_found, "cannot write: " + path);
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

AudioClip fix_duration(const AudioClip& clip, double seconds) {
    clip.validate();
    if (seconds <= 0) raise(Errc::invalid_input, "fix_duration: non-positive duration");
    const auto target = static_cast<std::size_t>(std::llround(seconds * clip.sample_rate_hz));
    AudioClip out;
    out.sample_rate_hz = clip.sample_rate_hz;
    out.samples = clip.samples;
    out.samples.resize(target, 0.0); // pads or truncates at the end
    return out;
}

std::vector<AudioClip> segment_stream(const AudioClip& clip, double window_s, double hop_s) {
    clip.validate();
    if (window_s <= 0) raise(Errc::invalid_input, "segment_stream: window must be positive");
    if (hop_s <= 0 || hop_s > window_s)
        raise(Errc::invalid_input, "segment_stream: hop must be in (0, window]");
    const auto w = static_cast<std::size_t>(std::llround(window_s * clip.sample_rate_hz));
    const auto h = static_cast<std::size_t>(std::llround(hop_s * clip.sample_rate_hz));
    if (w == 0 || h == 0) raise(Errc::invalid_input, "segment_stream: window/hop below one sample");

    const std::size_t n = clip.samples.size();
    std::size_t count = 1;
    if (n > w) count = (n - w + h - 1) / h + 1;

    std::vector<AudioClip> windows;
    windows.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        AudioClip win;
        win.sample_rate_hz = clip.sample_rate_hz;
        win.samples.assign(w, 0.0);
        const std::size_t start = k * h;
        if (start < n) {
            const std::size_t take = std::min(w, n - start);
            std::copy_n(clip.samples.begin() + static_cast<std::ptrdiff_t>(start), take,
                        win.samples.begin());
        }
        windows.push_back(std::move(win));
    }
    return windows;
}

} // namespace screamloc
