#include <doctest.h>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "screamloc/audio_io.hpp"
#include "screamloc/errors.hpp"

using namespace screamloc;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "screamloc_tests";
    fs::create_directories(dir);
    return dir / name;
}

void append_u32(std::string& s, uint32_t v) {
    for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void append_u16(std::string& s, uint16_t v) {
    s.push_back(static_cast<char>(v & 0xff));
    s.push_back(static_cast<char>((v >> 8) & 0xff));
}

// Hand-rolled header builder so load_wav is not tested against save_wav.
std::string wav_bytes(uint16_t format, uint16_t channels, uint32_t rate, uint16_t bits,
                      const std::string& payload) {
    std::string s = "RIFF";
    append_u32(s, 36 + static_cast<uint32_t>(payload.size()));
    s += "WAVE";
    s += "fmt ";
    append_u32(s, 16);
    append_u16(s, format);
    append_u16(s, channels);
    append_u32(s, rate);
    append_u32(s, rate * channels * bits / 8);
    append_u16(s, static_cast<uint16_t>(channels * bits / 8));
    append_u16(s, bits);
    s += "data";
    append_u32(s, static_cast<uint32_t>(payload.size()));
    s += payload;
    return s;
}

void write_file(const fs::path& p, const std::string& bytes) {
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::string pcm16_payload(const std::vector<int16_t>& samples) {
    std::string s;
    for (int16_t v : samples) append_u16(s, static_cast<uint16_t>(v));
    return s;
}

} // namespace

TEST_CASE("load_wav reads PCM16 silence") {
    const auto path = temp_file("silence.wav");
    write_file(path, wav_bytes(1, 1, 16000, 16, pcm16_payload(std::vector<int16_t>(16000, 0))));
    const AudioClip clip = load_wav(path.string());
    CHECK(clip.sample_rate_hz == 16000);
    REQUIRE(clip.samples.size() == 16000);
    for (double s : clip.samples) CHECK(s == 0.0);
}

TEST_CASE("load_wav scales PCM16 by 1/32768") {
    const auto path = temp_file("fullscale.wav");
    write_file(path, wav_bytes(1, 1, 16000, 16, pcm16_payload({32767, -32768, 16384})));
    const AudioClip clip = load_wav(path.string());
    REQUIRE(clip.samples.size() == 3);
    CHECK(clip.samples[0] == doctest::Approx(32767.0 / 32768.0).epsilon(1e-12));
    CHECK(clip.samples[1] == -1.0);
    CHECK(clip.samples[2] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("load_wav honors a 44100 Hz header") {
    const auto path = temp_file("rate44100.wav");
    write_file(path, wav_bytes(1, 1, 44100, 16, pcm16_payload({0, 0, 0, 0})));
    CHECK(load_wav(path.string()).sample_rate_hz == 44100);
}

TEST_CASE("load_wav reads float32 samples as-is") {
    std::string payload;
    for (float v : {0.25f, -0.75f, 1.0f}) {
        uint32_t raw;
        std::memcpy(&raw, &v, 4);
        append_u32(payload, raw);
    }
    const auto path = temp_file("float32.wav");
    write_file(path, wav_bytes(3, 1, 16000, 32, payload));
    const AudioClip clip = load_wav(path.string());
    REQUIRE(clip.samples.size() == 3);
    CHECK(clip.samples[0] == doctest::Approx(0.25));
    CHECK(clip.samples[1] == doctest::Approx(-0.75));
    CHECK(clip.samples[2] == doctest::Approx(1.0));
}

TEST_CASE("load_wav rejects the unsupported and the broken") {
    const auto check_code = [](const fs::path& p, Errc expected) {
        try {
            load_wav(p.string());
            FAIL_CHECK("expected an error for ", p.filename().string());
        } catch (const Error& e) {
            CHECK(e.code() == expected);
        }
    };

    check_code(temp_file("does_not_exist.wav"), Errc::file_not_found);

    const auto stereo = temp_file("stereo.wav");
    write_file(stereo, wav_bytes(1, 2, 16000, 16, pcm16_payload({0, 0})));
    check_code(stereo, Errc::unsupported_format);

    const auto alaw = temp_file("alaw.wav");
    write_file(alaw, wav_bytes(6, 1, 16000, 16, pcm16_payload({0, 0})));
    check_code(alaw, Errc::unsupported_format);

    const auto pcm24 = temp_file("pcm24.wav");
    write_file(pcm24, wav_bytes(1, 1, 16000, 24, std::string(6, '\0')));
    check_code(pcm24, Errc::unsupported_format);

    const auto truncated = temp_file("truncated.wav");
    std::string bytes = wav_bytes(1, 1, 16000, 16, pcm16_payload({1, 2, 3, 4}));
    write_file(truncated, bytes.substr(0, 20));
    check_code(truncated, Errc::corrupt_header);

    const auto not_riff = temp_file("not_riff.wav");
    write_file(not_riff, "JUNKJUNKJUNKJUNKJUNK");
    check_code(not_riff, Errc::corrupt_header);
}

TEST_CASE("save_wav/load_wav round-trips within PCM16 quantization") {
    AudioClip clip;
    clip.sample_rate_hz = 16000;
    auto g = oracle::rng(7);
    clip.samples.resize(4000);
    for (auto& s : clip.samples) s = oracle::uniform(g, -0.95, 0.95);
    clip.samples[0] = -1.0; // negative full scale is exact

    const auto path = temp_file("roundtrip.wav");
    save_wav(path.string(), clip);
    const AudioClip back = load_wav(path.string());
    REQUIRE(back.samples.size() == clip.samples.size());
    CHECK(back.samples[0] == -1.0);
    for (std::size_t i = 0; i < clip.samples.size(); ++i)
        CHECK(std::abs(back.samples[i] - clip.samples[i]) <= 1.0 / 32768.0);
}

TEST_CASE("resample is the identity at the same rate") {
    const auto clip = oracle::noise_clip(1000, 16000, 11);
    const AudioClip out = resample(clip, 16000);
    CHECK(out.samples == clip.samples);
}

TEST_CASE("resample preserves duration within one sample") {
    const auto clip = oracle::noise_clip(44100, 44100, 3);
    const AudioClip out = resample(clip, 16000);
    CHECK(out.sample_rate_hz == 16000);
    CHECK(std::abs(static_cast<long long>(out.samples.size()) - 16000LL) <= 1);
}

TEST_CASE("resample keeps a 1 kHz tone in its STFT bin") {
    const auto clip = oracle::tone(1000.0, 1.0, 44100);
    const int bin_before = oracle::dominant_bin(clip, 512);
    const double freq_before = bin_before * 44100.0 / 512.0;
    CHECK(std::abs(freq_before - 1000.0) <= 44100.0 / 512.0);

    const AudioClip out = resample(clip, 16000);
    const int bin_after = oracle::dominant_bin(out, 512);
    const double freq_after = bin_after * 16000.0 / 512.0;
    CHECK(std::abs(freq_after - 1000.0) <= 16000.0 / 512.0);
}

TEST_CASE("resample twice to the same rate is idempotent") {
    const auto clip = oracle::noise_clip(8000, 44100, 13);
    const AudioClip once = resample(clip, 16000);
    const AudioClip twice = resample(once, 16000);
    CHECK(once.samples == twice.samples);
}

TEST_CASE("fix_duration pads and truncates at the end") {
    AudioClip seven = oracle::noise_clip(7 * 16000, 16000, 2);
    const AudioClip padded = fix_duration(seven, 10.0);
    REQUIRE(padded.samples.size() == 160000);
    for (std::size_t i = 7 * 16000; i < padded.samples.size(); ++i)
        CHECK(padded.samples[i] == 0.0);
    for (std::size_t i = 0; i < seven.samples.size(); ++i)
        CHECK(padded.samples[i] == seven.samples[i]);

    AudioClip twelve = oracle::noise_clip(12 * 16000, 16000, 4);
    const AudioClip cut = fix_duration(twelve, 10.0);
    REQUIRE(cut.samples.size() == 160000);
    for (std::size_t i = 0; i < cut.samples.size(); ++i)
        CHECK(cut.samples[i] == twelve.samples[i]);

    AudioClip ten = oracle::noise_clip(160000, 16000, 5);
    CHECK(fix_duration(ten, 10.0).samples == ten.samples);

    // applying it twice changes nothing
    CHECK(fix_duration(padded, 10.0).samples == padded.samples);
}

TEST_CASE("segment_stream window count and padding") {
    const auto clip30 = oracle::noise_clip(30 * 16000, 16000, 8);
    CHECK(segment_stream(clip30, 10.0, 10.0).size() == 3);

    const auto clip25 = oracle::noise_clip(25 * 16000, 16000, 9);
    const auto windows = segment_stream(clip25, 10.0, 10.0);
    REQUIRE(windows.size() == 3);
    for (std::size_t i = 80000; i < 160000; ++i) CHECK(windows[2].samples[i] == 0.0);

    const auto clip10 = oracle::noise_clip(10 * 16000, 16000, 10);
    const auto one = segment_stream(clip10, 10.0, 10.0);
    REQUIRE(one.size() == 1);
    CHECK(one[0].samples == fix_duration(clip10, 10.0).samples);
}

TEST_CASE("segment_stream tiles reconstruct the zero-padded original") {
    const auto clip = oracle::noise_clip(37123, 16000, 21);
    const auto windows = segment_stream(clip, 1.0, 1.0);
    std::vector<double> rebuilt;
    for (const auto& w : windows) rebuilt.insert(rebuilt.end(), w.samples.begin(), w.samples.end());
    REQUIRE(rebuilt.size() >= clip.samples.size());
    for (std::size_t i = 0; i < clip.samples.size(); ++i) CHECK(rebuilt[i] == clip.samples[i]);
    for (std::size_t i = clip.samples.size(); i < rebuilt.size(); ++i) CHECK(rebuilt[i] == 0.0);
}
