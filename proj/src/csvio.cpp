#include "arrowid/csvio.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <string_view>
#include <system_error>
#include <vector>

#include "text_format.hpp"

namespace arrowid {

namespace {

using detail::append_double;

double parse_field(std::string_view field, const std::string& path, long line) {
    double v = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc() || res.ptr != field.data() + field.size() || !std::isfinite(v))
        throw parse_error(path + ": bad numeric field '" + std::string(field) + "'", line);
    return v;
}

struct Table {
    std::vector<std::vector<double>> rows;
    std::vector<long> line_numbers;
};

// Shared reader: skips blanks and '#' comments, demands the exact header,
// then parses the fixed column count per row.
Table read_table(const std::string& path, std::string_view header, size_t columns) {
    std::ifstream in(path);
    if (!in) throw parse_error(path + ": cannot open");

    Table table;
    std::string raw;
    long line = 0;
    bool header_seen = false;
    while (std::getline(in, raw)) {
        ++line;
        std::string_view sv(raw);
        if (!sv.empty() && sv.back() == '\r') sv.remove_suffix(1);
        if (sv.empty() || sv.front() == '#') continue;
        if (!header_seen) {
            if (sv != header)
                throw parse_error(path + ": expected header '" + std::string(header) + "'", line);
            header_seen = true;
            continue;
        }
        std::vector<double> row;
        size_t start = 0;
        while (true) {
            const size_t comma = sv.find(',', start);
            const auto field = sv.substr(start, comma == std::string_view::npos
                                                    ? std::string_view::npos
                                                    : comma - start);
            row.push_back(parse_field(field, path, line));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (row.size() != columns)
            throw parse_error(path + ": expected " + std::to_string(columns) + " fields, got " +
                                  std::to_string(row.size()),
                              line);
        table.rows.push_back(std::move(row));
        table.line_numbers.push_back(line);
    }
    if (!header_seen) throw parse_error(path + ": missing header");
    if (table.rows.size() < 2) throw parse_error(path + ": need at least two data rows");
    return table;
}

// Timestamps must advance by a uniform step, to a relative 1e-6.
double uniform_dt(const Table& table, const std::string& path) {
    const double dt0 = table.rows[1][0] - table.rows[0][0];
    if (!(dt0 > 0.0))
        throw parse_error(path + ": timestamps must strictly increase", table.line_numbers[1]);
    for (size_t i = 1; i < table.rows.size(); ++i) {
        const double step = table.rows[i][0] - table.rows[i - 1][0];
        if (std::abs(step - dt0) > 1e-6 * dt0)
            throw parse_error(path + ": non-uniform timestamp", table.line_numbers[i]);
    }
    const size_t n = table.rows.size();
    return (table.rows[n - 1][0] - table.rows[0][0]) / static_cast<double>(n - 1);
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw parse_error(path + ": cannot open for writing");
    out << content;
    if (!out) throw parse_error(path + ": write failed");
}

}  // namespace

Dataset load_dataset(const std::string& path) {
    const Table table = read_table(path, "t,force_N,disp_m", 3);
    Dataset data;
    data.dt = uniform_dt(table, path);
    const Index n = static_cast<Index>(table.rows.size());
    data.force.resize(n);
    data.displacement.resize(n);
    for (Index i = 0; i < n; ++i) {
        data.force[i] = table.rows[i][1];
        data.displacement[i] = table.rows[i][2];
    }
    validate(data, path.c_str());
    return data;
}

void write_dataset(const std::string& path, const Dataset& data) {
    validate(data, "write_dataset: data");
    std::string out = "t,force_N,disp_m\n";
    for (Index i = 0; i < data.force.size(); ++i) {
        append_double(out, static_cast<double>(i) * data.dt);
        out.push_back(',');
        append_double(out, data.force[i]);
        out.push_back(',');
        append_double(out, data.displacement[i]);
        out.push_back('\n');
    }
    write_file(path, out);
}

TimeSeries load_command(const std::string& path) {
    const Table table = read_table(path, "t,command_V", 2);
    TimeSeries command;
    command.dt = uniform_dt(table, path);
    const Index n = static_cast<Index>(table.rows.size());
    command.values.resize(n);
    for (Index i = 0; i < n; ++i) command.values[i] = table.rows[i][1];
    validate(command, path.c_str());
    return command;
}

void write_command(const std::string& path, const TimeSeries& command) {
    validate(command, "write_command: command");
    std::string out = "t,command_V\n";
    for (Index i = 0; i < command.values.size(); ++i) {
        append_double(out, static_cast<double>(i) * command.dt);
        out.push_back(',');
        append_double(out, command.values[i]);
        out.push_back('\n');
    }
    write_file(path, out);
}

}  // namespace arrowid
