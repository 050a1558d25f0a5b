#include "kerrcav/io.hpp"

#include <array>
#include <charconv>
#include <istream>
#include <sstream>

namespace kerrcav {

std::string format_double(double v) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                                   std::chars_format::general, 17);
    return std::string(buf.data(), res.ptr);
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const nlohmann::json& metadata) {
    os << "# " << metadata.dump() << '\n';
    const int N = traj.samples.empty() ? 0 : traj.samples.front().half_length();
    os << 't';
    for (int j = -N; j <= N; ++j) os << ",n_" << j;
    os << ",sz,re_sm,im_sm,Q,L\n";
    for (std::size_t i = 0; i < traj.samples.size(); ++i) {
        const auto& s = traj.samples[i];
        const auto& o = traj.observables[i];
        os << format_double(s.t);
        for (double n : o.n) os << ',' << format_double(n);
        os << ',' << format_double(s.sz) << ',' << format_double(s.sm.real()) << ','
           << format_double(s.sm.imag()) << ',' << format_double(o.Q) << ','
           << format_double(o.L) << '\n';
    }
}

nlohmann::json trajectory_to_json(const Trajectory& traj) {
    nlohmann::json samples = nlohmann::json::array();
    for (std::size_t i = 0; i < traj.samples.size(); ++i) {
        const auto& s = traj.samples[i];
        const auto& o = traj.observables[i];
        samples.push_back({{"t", s.t},
                           {"n", o.n},
                           {"sz", s.sz},
                           {"sm", {s.sm.real(), s.sm.imag()}},
                           {"Q", o.Q},
                           {"L", o.L}});
    }
    return nlohmann::json{{"q_drift", traj.q_drift}, {"l_drift", traj.l_drift},
                          {"samples", std::move(samples)}};
}

nlohmann::json read_json_skipping_comments(std::istream& is) {
    std::ostringstream body;
    std::string line;
    bool in_header = true;
    while (std::getline(is, line)) {
        if (in_header && !line.empty() && line.front() == '#') continue;
        in_header = false;
        body << line << '\n';
    }
    return nlohmann::json::parse(body.str());
}

}  // namespace kerrcav
