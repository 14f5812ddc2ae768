#include "screamloc/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <random>

#include <json.hpp>

#include "screamloc/audio_io.hpp"
#include "screamloc/errors.hpp"
#include "screamloc/fft.hpp"

namespace screamloc {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Box-Muller on a raw mt19937_64 stream; avoids libstdc++-specific
// normal_distribution sequences.
class Gaussian {
public:
    explicit Gaussian(std::uint64_t seed) : rng_(seed) {}

    double operator()() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * M_PI * u2);
        have_spare_ = true;
        return r * std::cos(2.0 * M_PI * u2);
    }

private:
    double uniform() {
        return (rng_() >> 11) * (1.0 / 9007199254740992.0); // 53-bit mantissa
    }
    std::mt19937_64 rng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

void normalize_peak(std::vector<double>& samples, double target) {
    double peak = 0.0;
    for (double s : samples) peak = std::max(peak, std::abs(s));
    if (peak > 0.0) {
        const double k = target / peak;
        for (double& s : samples) s *= k;
    }
}

void validate_scene(const Scene& scene) {
    scene.array.validate();
    if (scene.c <= 0) raise(Errc::invalid_input, "scene: c must be positive");
    if (scene.sample_rate_hz <= 0) raise(Errc::invalid_input, "scene: bad sample rate");
    if (scene.duration_s <= 0) raise(Errc::invalid_input, "scene: bad duration");
    if (scene.snr_db && !std::isfinite(*scene.snr_db))
        raise(Errc::invalid_input, "scene: snr must be finite");
    if (scene.echo) {
        if (scene.echo->gain < 0.0 || scene.echo->gain >= 1.0)
            raise(Errc::invalid_input, "scene: echo gain must be in [0, 1)");
        if (scene.echo->delay_s < 0.0) raise(Errc::invalid_input, "scene: negative echo delay");
    }
    // sanity bound: the source must stay within 1 km of the array's box
    Vec3 lo = scene.array.mics[0].pos, hi = lo;
    for (const auto& m : scene.array.mics) {
        lo.x = std::min(lo.x, m.pos.x);
        lo.y = std::min(lo.y, m.pos.y);
        lo.z = std::min(lo.z, m.pos.z);
        hi.x = std::max(hi.x, m.pos.x);
        hi.y = std::max(hi.y, m.pos.y);
        hi.z = std::max(hi.z, m.pos.z);
    }
    const Vec3& s = scene.source_pos;
    if (s.x < lo.x - 1000 || s.x > hi.x + 1000 || s.y < lo.y - 1000 || s.y > hi.y + 1000 ||
        s.z < lo.z - 1000 || s.z > hi.z + 1000)
        raise(Errc::invalid_input, "scene: source farther than 1 km from the array");
}

std::vector<TdoaMeasurement> exact_tdoas(const MicArray& array, const Vec3& source, double c) {
    std::vector<TdoaMeasurement> out;
    for (std::size_t i = 0; i < array.mics.size(); ++i) {
        for (std::size_t j = i + 1; j < array.mics.size(); ++j) {
            TdoaMeasurement m;
            m.mic_i = array.mics[i].id;
            m.mic_j = array.mics[j].id;
            m.tau_s = (distance(source, array.mics[i].pos) - distance(source, array.mics[j].pos)) / c;
            m.weight = 1.0;
            m.peak_sharpness = 1.0;
            out.push_back(std::move(m));
        }
    }
    return out;
}

} // namespace

AudioClip synth_source(const SourceSpec& spec, double duration_s, int sample_rate_hz,
                       std::uint64_t seed) {
    if (duration_s <= 0 || sample_rate_hz <= 0)
        raise(Errc::invalid_input, "synth_source: bad duration/rate");
    const auto n = static_cast<std::size_t>(std::llround(duration_s * sample_rate_hz));
    const double nyquist = sample_rate_hz / 2.0;

    AudioClip clip;
    clip.sample_rate_hz = sample_rate_hz;
    clip.samples.assign(n, 0.0);

    switch (spec.kind) {
        case SourceSpec::Kind::white_noise: {
            Gaussian gauss(splitmix64(seed));
            for (auto& s : clip.samples) s = gauss();
            break;
        }
        case SourceSpec::Kind::harmonic_burst: {
            if (spec.harmonics < 1) raise(Errc::invalid_input, "synth_source: need >= 1 harmonic");
            if (spec.fundamental_hz <= 0 || spec.fundamental_hz * spec.harmonics >= nyquist)
                raise(Errc::nyquist_violation, "harmonic burst exceeds Nyquist");
            if (spec.attack_s <= 0 || spec.decay_s <= 0)
                raise(Errc::invalid_input, "synth_source: bad envelope times");
            for (std::size_t i = 0; i < n; ++i) {
                const double t = static_cast<double>(i) / sample_rate_hz;
                const double env = (1.0 - std::exp(-t / spec.attack_s)) * std::exp(-t / spec.decay_s);
                double v = 0.0;
                for (int k = 1; k <= spec.harmonics; ++k)
                    v += std::sin(2.0 * M_PI * k * spec.fundamental_hz * t) / k;
                clip.samples[i] = env * v;
            }
            break;
        }
        case SourceSpec::Kind::chirp: {
            if (spec.chirp_start_hz <= 0 || spec.chirp_end_hz <= 0 ||
                spec.chirp_start_hz >= nyquist || spec.chirp_end_hz >= nyquist)
                raise(Errc::nyquist_violation, "chirp exceeds Nyquist");
            const double rate = (spec.chirp_end_hz - spec.chirp_start_hz) / duration_s;
            for (std::size_t i = 0; i < n; ++i) {
                const double t = static_cast<double>(i) / sample_rate_hz;
                clip.samples[i] = std::sin(2.0 * M_PI * (spec.chirp_start_hz * t + 0.5 * rate * t * t));
            }
            break;
        }
    }
    normalize_peak(clip.samples, 0.9);
    return clip;
}

std::pair<MultichannelRecording, GroundTruth> simulate(const Scene& scene) {
    validate_scene(scene);
    const int sr = scene.sample_rate_hz;
    const AudioClip src = synth_source(scene.source, scene.duration_s, sr, scene.seed);
    const std::size_t n = src.samples.size();

    double max_delay_s = 0.0;
    std::vector<double> dist(scene.array.mics.size());
    for (std::size_t m = 0; m < scene.array.mics.size(); ++m) {
        dist[m] = std::max(distance(scene.source_pos, scene.array.mics[m].pos), 1e-6);
        max_delay_s = std::max(max_delay_s, dist[m] / scene.c);
    }
    if (scene.echo) max_delay_s += scene.echo->delay_s;
    if (max_delay_s > scene.duration_s / 2.0)
        raise(Errc::duration_too_short, "propagation delay exceeds half the scene duration");

    // Pad past the largest shift so the circular phase shift cannot wrap.
    const std::size_t margin = static_cast<std::size_t>(std::ceil(max_delay_s * sr)) + 64;
    const std::size_t P = fft::next_pow2(n + margin);
    std::vector<std::complex<double>> padded(P);
    for (std::size_t i = 0; i < n; ++i) padded[i] = src.samples[i];
    const auto spectrum = fft::fft(padded);

    MultichannelRecording rec;
    GroundTruth truth;
    truth.source_pos = scene.source_pos;
    truth.tdoas = exact_tdoas(scene.array, scene.source_pos, scene.c);

    std::vector<std::complex<double>> shifted(P);
    for (std::size_t m = 0; m < scene.array.mics.size(); ++m) {
        const double delay_samples = dist[m] / scene.c * sr;
        const double gain = 1.0 / dist[m]; // 1/r with 1 m reference
        const double echo_delay = scene.echo ? scene.echo->delay_s * sr : 0.0;
        const double echo_gain = scene.echo ? scene.echo->gain : 0.0;

        // conjugate-symmetric delay operator; the Nyquist bin stays real
        const std::size_t half = P / 2;
        for (std::size_t k = 0; k <= half; ++k) {
            const double w = 2.0 * M_PI * static_cast<double>(k) / static_cast<double>(P);
            std::complex<double> h = std::polar(1.0, -w * delay_samples);
            if (echo_gain > 0.0) h += echo_gain * std::polar(1.0, -w * (delay_samples + echo_delay));
            if (k == half) h = std::complex<double>(h.real(), 0.0);
            shifted[k] = spectrum[k] * h * gain;
            if (k != 0 && k != half) shifted[P - k] = std::conj(shifted[k]);
        }
        auto time = fft::ifft(shifted);

        AudioClip ch;
        ch.sample_rate_hz = sr;
        ch.samples.resize(n);
        for (std::size_t i = 0; i < n; ++i) ch.samples[i] = time[i].real();

        if (scene.snr_db) {
            double power = 0.0;
            for (double s : ch.samples) power += s * s;
            power /= static_cast<double>(n);
            if (power > 0.0) {
                const double sigma = std::sqrt(power / std::pow(10.0, *scene.snr_db / 10.0));
                Gaussian gauss(splitmix64(scene.seed ^ splitmix64(0x106F00D5ULL + m)));
                for (double& s : ch.samples) s += sigma * gauss();
            }
        }
        rec.channels.push_back(std::move(ch));
        rec.channel_ids.push_back(scene.array.mics[m].id);
    }
    return {std::move(rec), std::move(truth)};
}

std::vector<TdoaMeasurement> ground_truth_tdoas(const Scene& scene) {
    validate_scene(scene);
    return exact_tdoas(scene.array, scene.source_pos, scene.c);
}

namespace {

SourceSpec::Kind kind_from_string(const std::string& s) {
    if (s == "white_noise") return SourceSpec::Kind::white_noise;
    if (s == "harmonic_burst") return SourceSpec::Kind::harmonic_burst;
    if (s == "chirp") return SourceSpec::Kind::chirp;
    raise(Errc::config, "unknown source kind: " + s);
}

std::string kind_to_string(SourceSpec::Kind k) {
    switch (k) {
        case SourceSpec::Kind::white_noise: return "white_noise";
        case SourceSpec::Kind::harmonic_burst: return "harmonic_burst";
        case SourceSpec::Kind::chirp: return "chirp";
    }
    return "?";
}

} // namespace

Scene load_scene(const std::string& path) {
    std::ifstream f(path);
    if (!f) raise(Errc::file_not_found, "cannot open scene: " + path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::config, "scene is not valid JSON: " + std::string(e.what()));
    }
    Scene s;
    try {
        for (const auto& m : j.at("mics")) {
            Mic mic;
            mic.id = m.at("id").is_string() ? m.at("id").get<std::string>()
                                            : std::to_string(m.at("id").get<long long>());
            mic.pos = {m.at("x").get<double>(), m.at("y").get<double>(), m.at("z").get<double>()};
            s.array.mics.push_back(std::move(mic));
        }
        const auto sp = j.at("source_pos").get<std::vector<double>>();
        if (sp.size() != 3) raise(Errc::config, "scene: source_pos must be a 3-vector");
        s.source_pos = {sp[0], sp[1], sp[2]};

        const auto& src = j.at("source");
        s.source.kind = kind_from_string(src.at("kind").get<std::string>());
        s.source.fundamental_hz = src.value("fundamental_hz", s.source.fundamental_hz);
        s.source.harmonics = src.value("harmonics", s.source.harmonics);
        s.source.attack_s = src.value("attack_s", s.source.attack_s);
        s.source.decay_s = src.value("decay_s", s.source.decay_s);
        s.source.chirp_start_hz = src.value("start_hz", s.source.chirp_start_hz);
        s.source.chirp_end_hz = src.value("end_hz", s.source.chirp_end_hz);

        if (j.contains("snr_db") && !j.at("snr_db").is_null())
            s.snr_db = j.at("snr_db").get<double>();
        if (j.contains("echo") && !j.at("echo").is_null())
            s.echo = Echo{j.at("echo").at("delay_s").get<double>(),
                          j.at("echo").at("gain").get<double>()};
        s.c = j.value("c", 343.0);
        s.sample_rate_hz = j.value("sample_rate_hz", 16000);
        s.duration_s = j.value("duration_s", 10.0);
        s.seed = j.value("seed", 0ULL);
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::config, "scene JSON missing fields: " + std::string(e.what()));
    }
    validate_scene(s);
    return s;
}

void save_scene(const Scene& s, const std::string& path) {
    nlohmann::json j;
    j["mics"] = nlohmann::json::array();
    for (const auto& m : s.array.mics)
        j["mics"].push_back({{"id", m.id}, {"x", m.pos.x}, {"y", m.pos.y}, {"z", m.pos.z}});
    j["source_pos"] = {s.source_pos.x, s.source_pos.y, s.source_pos.z};
    j["source"] = {{"kind", kind_to_string(s.source.kind)},
                   {"fundamental_hz", s.source.fundamental_hz},
                   {"harmonics", s.source.harmonics},
                   {"attack_s", s.source.attack_s},
                   {"decay_s", s.source.decay_s},
                   {"start_hz", s.source.chirp_start_hz},
                   {"end_hz", s.source.chirp_end_hz}};
    if (s.snr_db) j["snr_db"] = *s.snr_db;
    if (s.echo) j["echo"] = {{"delay_s", s.echo->delay_s}, {"gain", s.echo->gain}};
    j["c"] = s.c;
    j["sample_rate_hz"] = s.sample_rate_hz;
    j["duration_s"] = s.duration_s;
    j["seed"] = s.seed;
    std::ofstream f(path, std::ios::trunc);
    if (!f) raise(Errc::file_not_found, "cannot write scene: " + path);
    f << j.dump(2) << "\n";
}

void save_simulation(const Scene& scene, const MultichannelRecording& rec,
                     const GroundTruth& truth, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    for (std::size_t i = 0; i < rec.channels.size(); ++i)
        save_wav(out_dir + "/mic_" + rec.channel_ids[i] + ".wav", rec.channels[i]);

    nlohmann::json j;
    j["source_pos"] = {truth.source_pos.x, truth.source_pos.y, truth.source_pos.z};
    j["c"] = scene.c;
    j["sample_rate_hz"] = scene.sample_rate_hz;
    j["tdoas"] = nlohmann::json::array();
    for (const auto& t : truth.tdoas)
        j["tdoas"].push_back({{"i", t.mic_i}, {"j", t.mic_j}, {"tau_s", t.tau_s}});
    std::ofstream f(out_dir + "/truth.json", std::ios::trunc);
    if (!f) raise(Errc::file_not_found, "cannot write truth.json under " + out_dir);
    f << j.dump(2) << "\n";
}

} // namespace screamloc
