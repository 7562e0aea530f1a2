// SPDX-License-Identifier: Apache-2.0
//
// fusetrack: Wi-Fi CSI and pressure-insole fusion for single-target tracking
// Copyright (C) 2026 The fusetrack authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "fusetrack/formats.hpp"
#include "fusetrack/error.hpp"

#include <json.hpp>
#include <zlib.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <string_view>

namespace fusetrack::io
{

using nlohmann::json;

namespace
{

bool wants_gzip(const fs::path &path, bool gzip) { return gzip || path.extension() == ".gz"; }

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true)
    {
        const std::size_t comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos)
            break;
        start = comma + 1;
    }
    return out;
}

// Line-oriented CSV walker: skips '#' comments and blank lines, checks the header.
class CsvReader
{
  public:
    CsvReader(const fs::path &path, const std::vector<std::string> &header) : path_(path.string()), text_(read_text(path))
    {
        std::vector<std::string_view> cols;
        if (!next(cols))
            throw Error(Errc::SchemaError, path_ + ": missing header row");
        if (cols.size() != header.size())
            throw Error(Errc::SchemaError, path_ + ": header has " + std::to_string(cols.size()) + " columns, expected " +
                                               std::to_string(header.size()));
        for (std::size_t i = 0; i < cols.size(); ++i)
            if (cols[i] != header[i])
                throw Error(Errc::SchemaError, path_ + ": header column " + std::to_string(i + 1) + " is '" +
                                                   std::string(cols[i]) + "', expected '" + header[i] + "'");
        width_ = header.size();
    }

    // Next data row, or false at end of file. Throws SchemaError on a column-count mismatch.
    bool row(std::vector<std::string_view> &cols)
    {
        if (!next(cols))
            return false;
        if (cols.size() != width_)
            throw Error(Errc::SchemaError, where() + ": " + std::to_string(cols.size()) + " columns, expected " +
                                               std::to_string(width_));
        return true;
    }

    double number(std::string_view field, std::size_t col) const
    {
        double v = 0.0;
        const auto *end = field.data() + field.size();
        const auto [ptr, ec] = std::from_chars(field.data(), end, v);
        if (field.empty() || ec != std::errc() || ptr != end || !std::isfinite(v))
            throw Error(Errc::ParseError, where() + " column " + std::to_string(col + 1) + ": not a finite number: '" +
                                              std::string(field) + "'");
        return v;
    }

    std::string where() const { return path_ + ":" + std::to_string(line_no_); }

  private:
    bool next(std::vector<std::string_view> &cols)
    {
        while (pos_ < text_.size())
        {
            const std::size_t nl = text_.find('\n', pos_);
            const std::size_t end = nl == std::string::npos ? text_.size() : nl;
            std::string_view line = trim(std::string_view(text_).substr(pos_, end - pos_));
            pos_ = end + 1;
            ++line_no_;
            if (line.empty() || line.front() == '#')
                continue;
            cols = split(line);
            return true;
        }
        return false;
    }

    std::string path_;
    std::string text_;
    std::size_t pos_ = 0;
    std::size_t line_no_ = 0;
    std::size_t width_ = 0;
};

// Buffered writer that spills to a plain or gzip file.
class Sink
{
  public:
    Sink(const fs::path &path, bool gzip) : path_(path), gzip_(wants_gzip(path, gzip))
    {
        if (gzip_)
        {
            gz_ = gzopen(path.string().c_str(), "wb");
            if (!gz_)
                throw Error(Errc::IoError, path.string() + ": cannot open for writing");
        }
        else
        {
            out_.open(path, std::ios::binary | std::ios::trunc);
            if (!out_)
                throw Error(Errc::IoError, path.string() + ": cannot open for writing");
        }
    }
    ~Sink()
    {
        if (gz_)
            gzclose(gz_);
    }
    Sink(const Sink &) = delete;
    Sink &operator=(const Sink &) = delete;

    Sink &operator<<(std::string_view s)
    {
        buf_ += s;
        if (buf_.size() > (1u << 20))
            flush();
        return *this;
    }
    Sink &operator<<(char c)
    {
        buf_ += c;
        return *this;
    }
    Sink &num(double v) { return *this << format_number(v); }

    void close()
    {
        flush();
        if (gz_)
        {
            const int rc = gzclose(gz_);
            gz_ = nullptr;
            if (rc != Z_OK)
                throw Error(Errc::IoError, path_.string() + ": write failed");
        }
        else
        {
            out_.close();
            if (!out_)
                throw Error(Errc::IoError, path_.string() + ": write failed");
        }
    }

  private:
    void flush()
    {
        if (buf_.empty())
            return;
        if (gz_)
        {
            if (gzwrite(gz_, buf_.data(), static_cast<unsigned>(buf_.size())) != static_cast<int>(buf_.size()))
                throw Error(Errc::IoError, path_.string() + ": write failed");
        }
        else
            out_.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
        buf_.clear();
    }

    fs::path path_;
    bool gzip_;
    gzFile gz_ = nullptr;
    std::ofstream out_;
    std::string buf_;
};

std::vector<std::string> csi_header()
{
    std::vector<std::string> h{"ts_s"};
    for (const char *part : {"re", "im"})
        for (std::size_t a = 1; a <= csi::kRxAntennas; ++a)
            for (std::size_t s = 1; s <= csi::kSubcarriers; ++s)
                h.push_back("a" + std::to_string(a) + "s" + std::to_string(s) + "_" + part);
    return h;
}

std::vector<std::string> pressure_header()
{
    std::vector<std::string> h{"ts_s", "foot"};
    for (std::size_t i = 1; i <= insole::kSensors; ++i)
        h.push_back((i < 10 ? "p0" : "p") + std::to_string(i));
    return h;
}

void write_header(Sink &out, const std::vector<std::string> &header)
{
    for (std::size_t i = 0; i < header.size(); ++i)
    {
        if (i)
            out << ',';
        out << header[i];
    }
    out << '\n';
}

void check_increasing(double prev, double cur, bool first, const CsvReader &r)
{
    if (!first && !(cur > prev))
        throw Error(Errc::SchemaError, r.where() + ": timestamps must be strictly increasing");
}

json point_json(Point2 p) { return json::array({p.x, p.y}); }

Point2 point_from(const json &j, const char *what)
{
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw Error(Errc::SchemaError, std::string("trajectory: '") + what + "' must be [x, y]");
    return {j[0].get<double>(), j[1].get<double>()};
}

double number_at(const json &obj, const char *key, const char *ctx)
{
    const auto it = obj.find(key);
    if (it == obj.end() || !it->is_number())
        throw Error(Errc::SchemaError, std::string(ctx) + ": missing numeric '" + key + "'");
    return it->get<double>();
}

} // namespace

std::string format_number(double v)
{
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 9);
    return std::string(buf, ec == std::errc() ? ptr : buf);
}

std::string read_text(const fs::path &path)
{
    gzFile gz = gzopen(path.string().c_str(), "rb");
    if (!gz)
        throw Error(Errc::IoError, path.string() + ": cannot open for reading");
    std::string out;
    char buf[1 << 16];
    int n = 0;
    while ((n = gzread(gz, buf, sizeof buf)) > 0)
        out.append(buf, static_cast<std::size_t>(n));
    const bool failed = n < 0;
    gzclose(gz);
    if (failed)
        throw Error(Errc::IoError, path.string() + ": read failed");
    return out;
}

void write_text(const fs::path &path, const std::string &text, bool gzip)
{
    Sink out(path, gzip);
    out << text;
    out.close();
}

csi::CsiStream read_csi(const fs::path &path)
{
    CsvReader r(path, csi_header());
    csi::CsiStream out;
    std::vector<std::string_view> cols;
    constexpr std::size_t n = csi::kFrameEntries;
    while (r.row(cols))
    {
        csi::CsiFrame f;
        f.timestamp = r.number(cols[0], 0);
        check_increasing(out.empty() ? 0.0 : out.back().timestamp, f.timestamp, out.empty(), r);
        for (std::size_t i = 0; i < n; ++i)
            f.h[i] = {r.number(cols[1 + i], 1 + i), r.number(cols[1 + n + i], 1 + n + i)};
        out.push_back(f);
    }
    return out;
}

void write_csi(const fs::path &path, std::span<const csi::CsiFrame> frames, bool gzip)
{
    Sink out(path, gzip);
    write_header(out, csi_header());
    for (const auto &f : frames)
    {
        out.num(f.timestamp);
        for (const auto &h : f.h)
            out << ',' << format_number(h.real());
        for (const auto &h : f.h)
            out << ',' << format_number(h.imag());
        out << '\n';
    }
    out.close();
}

insole::PressureStream read_pressure(const fs::path &path)
{
    CsvReader r(path, pressure_header());
    insole::PressureStream out;
    std::vector<std::string_view> cols;
    while (r.row(cols))
    {
        insole::PressureFrame f;
        f.timestamp = r.number(cols[0], 0);
        check_increasing(out.empty() ? 0.0 : out.back().timestamp, f.timestamp, out.empty(), r);
        if (cols[1] == "L")
            f.foot = insole::Foot::Left;
        else if (cols[1] == "R")
            f.foot = insole::Foot::Right;
        else
            throw Error(Errc::ParseError, r.where() + " column 2: foot must be L or R, got '" + std::string(cols[1]) + "'");
        for (std::size_t i = 0; i < insole::kSensors; ++i)
        {
            f.p[i] = r.number(cols[2 + i], 2 + i);
            if (f.p[i] < 0.0)
                throw Error(Errc::SchemaError, r.where() + " column " + std::to_string(3 + i) + ": negative pressure");
        }
        out.push_back(f);
    }
    return out;
}

void write_pressure(const fs::path &path, std::span<const insole::PressureFrame> frames, bool gzip)
{
    Sink out(path, gzip);
    out << "# insole 9x5 grid, row-major; row 1 (p01..p05) is the toe, row 9 (p41..p45) the heel\n";
    write_header(out, pressure_header());
    for (const auto &f : frames)
    {
        out.num(f.timestamp) << ',' << (f.foot == insole::Foot::Left ? 'L' : 'R');
        for (double p : f.p)
            out << ',' << format_number(p);
        out << '\n';
    }
    out.close();
}

insole::SensorLayout read_layout(const fs::path &path)
{
    CsvReader r(path, {"row", "col", "y"});
    insole::SensorLayout layout;
    std::array<bool, insole::kSensors> seen{};
    std::vector<std::string_view> cols;
    while (r.row(cols))
    {
        const double row = r.number(cols[0], 0), col = r.number(cols[1], 1);
        if (row != std::floor(row) || col != std::floor(col) || row < 1 || row > insole::kRows || col < 1 ||
            col > insole::kCols)
            throw Error(Errc::SchemaError, r.where() + ": row/col out of the 9x5 grid");
        const auto idx = static_cast<std::size_t>(row - 1) * insole::kCols + static_cast<std::size_t>(col - 1);
        if (seen[idx])
            throw Error(Errc::SchemaError, r.where() + ": duplicate sensor");
        seen[idx] = true;
        layout.y[idx] = r.number(cols[2], 2);
    }
    for (bool s : seen)
        if (!s)
            throw Error(Errc::SchemaError, path.string() + ": layout must list all 45 sensors");
    layout.validate();
    return layout;
}

void write_layout(const fs::path &path, const insole::SensorLayout &layout)
{
    Sink out(path, false);
    out << "# longitudinal sensor coordinate, 0 = heel, 1 = toe; row 1 is the toe row\n";
    out << "row,col,y\n";
    for (std::size_t r = 0; r < insole::kRows; ++r)
        for (std::size_t c = 0; c < insole::kCols; ++c)
            out << std::to_string(r + 1) << ',' << std::to_string(c + 1) << ',' << format_number(layout.y[r * insole::kCols + c])
                << '\n';
    out.close();
}

std::optional<Point2> GroundTruthTrace::at(double t) const
{
    if (times.empty() || t < times.front() || t > times.back())
        return std::nullopt;
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    if (it == times.end())
        return positions.back();
    const auto i = static_cast<std::size_t>(it - times.begin());
    if (i == 0)
        return positions.front();
    const double u = (t - times[i - 1]) / (times[i] - times[i - 1]);
    return positions[i - 1] + u * (positions[i] - positions[i - 1]);
}

GroundTruthTrace read_ground_truth(const fs::path &path)
{
    CsvReader r(path, {"ts_s", "x_m", "y_m"});
    GroundTruthTrace gt;
    std::vector<std::string_view> cols;
    while (r.row(cols))
    {
        const double t = r.number(cols[0], 0);
        check_increasing(gt.times.empty() ? 0.0 : gt.times.back(), t, gt.times.empty(), r);
        gt.times.push_back(t);
        gt.positions.push_back({r.number(cols[1], 1), r.number(cols[2], 2)});
    }
    return gt;
}

void write_ground_truth(const fs::path &path, const GroundTruthTrace &gt, bool gzip)
{
    Sink out(path, gzip);
    out << "ts_s,x_m,y_m\n";
    for (std::size_t i = 0; i < gt.times.size(); ++i)
    {
        out.num(gt.times[i]) << ',';
        out.num(gt.positions[i].x) << ',';
        out.num(gt.positions[i].y) << '\n';
    }
    out.close();
}

std::string trajectory_to_string(const TrajectoryFile &traj)
{
    json j;
    j["format"] = "fusetrack-trajectory";
    j["version"] = 1;
    j["scene"] = {{"tx", point_json(traj.scene.tx)},
                  {"rx", point_json(traj.scene.rx)},
                  {"carrier_hz", traj.scene.carrier_hz},
                  {"antenna_spacing", traj.scene.antenna_spacing},
                  {"area",
                   {{"xmin", traj.scene.area.xmin},
                    {"xmax", traj.scene.area.xmax},
                    {"ymin", traj.scene.area.ymin},
                    {"ymax", traj.scene.area.ymax}}}};
    j["config_hash"] = traj.config_hash;
    json states = json::array();
    for (const auto &s : traj.states)
    {
        json r = std::isfinite(s.residual) ? json(s.residual) : json(nullptr);
        states.push_back({{"t", s.t}, {"x", s.x}, {"y", s.y}, {"phi", s.phi}, {"residual", r}});
    }
    j["states"] = std::move(states);
    json metrics = json::object();
    for (const auto &[k, v] : traj.metrics)
        metrics[k] = std::isfinite(v) ? json(v) : json(nullptr);
    j["metrics"] = std::move(metrics);
    return j.dump(2) + "\n";
}

TrajectoryFile trajectory_from_string(const std::string &text)
{
    json j;
    try
    {
        j = json::parse(text);
    }
    catch (const json::parse_error &e)
    {
        throw Error(Errc::ParseError, std::string("trajectory: ") + e.what());
    }
    if (!j.is_object() || j.value("format", "") != "fusetrack-trajectory")
        throw Error(Errc::SchemaError, "trajectory: not a fusetrack trajectory document");
    if (!j.contains("scene") || !j["scene"].is_object() || !j.contains("states") || !j["states"].is_array() ||
        !j.contains("config_hash") || !j["config_hash"].is_string())
        throw Error(Errc::SchemaError, "trajectory: requires 'scene', 'config_hash' and 'states'");

    TrajectoryFile out;
    const json &sc = j["scene"];
    out.scene.tx = point_from(sc.value("tx", json()), "scene.tx");
    out.scene.rx = point_from(sc.value("rx", json()), "scene.rx");
    out.scene.carrier_hz = number_at(sc, "carrier_hz", "trajectory scene");
    out.scene.antenna_spacing = number_at(sc, "antenna_spacing", "trajectory scene");
    if (!sc.contains("area") || !sc["area"].is_object())
        throw Error(Errc::SchemaError, "trajectory: missing scene.area");
    const json &ar = sc["area"];
    out.scene.area = {number_at(ar, "xmin", "scene.area"), number_at(ar, "xmax", "scene.area"),
                      number_at(ar, "ymin", "scene.area"), number_at(ar, "ymax", "scene.area")};
    out.config_hash = j["config_hash"].get<std::string>();

    for (const auto &s : j["states"])
    {
        if (!s.is_object())
            throw Error(Errc::SchemaError, "trajectory: state entries must be objects");
        TrajectoryPoint p;
        p.t = number_at(s, "t", "trajectory state");
        p.x = number_at(s, "x", "trajectory state");
        p.y = number_at(s, "y", "trajectory state");
        p.phi = number_at(s, "phi", "trajectory state");
        const auto res = s.find("residual");
        if (res == s.end() || !(res->is_number() || res->is_null()))
            throw Error(Errc::SchemaError, "trajectory state: missing 'residual'");
        p.residual = res->is_null() ? std::numeric_limits<double>::infinity() : res->get<double>();
        if (!out.states.empty() && !(p.t > out.states.back().t))
            throw Error(Errc::SchemaError, "trajectory: state timestamps must be strictly increasing");
        out.states.push_back(p);
    }
    if (j.contains("metrics"))
    {
        if (!j["metrics"].is_object())
            throw Error(Errc::SchemaError, "trajectory: 'metrics' must be an object");
        for (const auto &[k, v] : j["metrics"].items())
        {
            if (!(v.is_number() || v.is_null()))
                throw Error(Errc::SchemaError, "trajectory: metric '" + k + "' must be numeric");
            out.metrics[k] = v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
        }
    }
    return out;
}

TrajectoryFile read_trajectory(const fs::path &path)
{
    try
    {
        return trajectory_from_string(read_text(path));
    }
    catch (const Error &e)
    {
        if (e.code() == Errc::IoError)
            throw;
        throw Error(e.code(), path.string() + ": " + e.what());
    }
}

void write_trajectory(const fs::path &path, const TrajectoryFile &traj) { write_text(path, trajectory_to_string(traj)); }

} // namespace fusetrack::io
