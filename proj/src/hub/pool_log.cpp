#include "twinhub/hub/pool_log.hpp"

#include "twinhub/core/error.hpp"

#include <fmt/format.h>

#include <charconv>
#include <fstream>

namespace twinhub::hub
{
    namespace
    {
        std::string quote(const std::string& field)
        {
            if (field.find_first_of(",\"\r\n") == std::string::npos)
            {
                return field;
            }
            std::string out = "\"";
            for (char c : field)
            {
                out += c;
                if (c == '"')
                {
                    out += '"';
                }
            }
            return out + "\"";
        }

        // Splits one record; quoted fields may contain commas and doubled quotes.
        // Returns false on a dangling quote.
        bool split(const std::string& line, std::vector<std::string>& out)
        {
            out.clear();
            std::string cur;
            bool quoted = false;
            for (std::size_t i = 0; i < line.size(); ++i)
            {
                const char c = line[i];
                if (quoted)
                {
                    if (c == '"' && i + 1 < line.size() && line[i + 1] == '"')
                    {
                        cur += '"';
                        ++i;
                    }
                    else if (c == '"')
                    {
                        quoted = false;
                    }
                    else
                    {
                        cur += c;
                    }
                }
                else if (c == '"')
                {
                    quoted = true;
                }
                else if (c == ',')
                {
                    out.push_back(std::move(cur));
                    cur.clear();
                }
                else
                {
                    cur += c;
                }
            }
            out.push_back(std::move(cur));
            return !quoted;
        }

        template <typename T>
        T parse_number(const std::string& text, std::size_t line_no, const char* column)
        {
            T value{};
            const auto* end = text.data() + text.size();
            const auto [ptr, ec] = std::from_chars(text.data(), end, value);
            if (ec != std::errc{} || ptr != end)
            {
                throw Error(ErrorCode::BadLog, fmt::format("line {}: bad {} '{}'", line_no, column, text));
            }
            return value;
        }
    } // namespace

    std::size_t write_pool_log(const std::filesystem::path& path, const std::vector<PoolLogRow>& rows)
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out)
        {
            throw Error(ErrorCode::IoFailure, "cannot open '" + path.string() + "' for writing");
        }
        out << kPoolLogHeader << '\n';
        for (const auto& r : rows)
        {
            out << fmt::format("{},{:.17g},{},{:.17g},{:.17g},{},", r.tick, r.time, quote(r.vehicle_id), r.arc_position, r.speed, quote(r.frame));
            if (r.gap_to_predecessor)
            {
                out << fmt::format("{:.17g}", *r.gap_to_predecessor);
            }
            out << '\n';
        }
        out.flush();
        if (!out)
        {
            throw Error(ErrorCode::IoFailure, "write to '" + path.string() + "' failed");
        }
        return rows.size();
    }

    std::vector<PoolLogRow> read_pool_log(const std::filesystem::path& path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in)
        {
            throw Error(ErrorCode::IoFailure, "cannot open '" + path.string() + "'");
        }
        std::string line;
        if (!std::getline(in, line) || line != kPoolLogHeader)
        {
            throw Error(ErrorCode::BadLog, "'" + path.string() + "' does not start with the pool log header");
        }
        std::vector<PoolLogRow> rows;
        std::vector<std::string> fields;
        std::size_t line_no = 1;
        while (std::getline(in, line))
        {
            ++line_no;
            if (line.empty())
            {
                continue;
            }
            if (!split(line, fields) || fields.size() != 7)
            {
                throw Error(ErrorCode::BadLog, fmt::format("line {}: expected 7 fields", line_no));
            }
            PoolLogRow r;
            r.tick = parse_number<std::uint64_t>(fields[0], line_no, "tick");
            r.time = parse_number<double>(fields[1], line_no, "time");
            r.vehicle_id = fields[2];
            r.arc_position = parse_number<double>(fields[3], line_no, "arc_position");
            r.speed = parse_number<double>(fields[4], line_no, "speed");
            r.frame = fields[5];
            if (!fields[6].empty())
            {
                r.gap_to_predecessor = parse_number<double>(fields[6], line_no, "gap_to_predecessor");
            }
            if (!rows.empty() && r.tick < rows.back().tick)
            {
                throw Error(ErrorCode::BadLog, fmt::format("line {}: tick goes backwards", line_no));
            }
            rows.push_back(std::move(r));
        }
        return rows;
    }
} // namespace twinhub::hub
