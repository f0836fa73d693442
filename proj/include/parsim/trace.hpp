#pragma once

#include "parsim/types.hpp"

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

namespace parsim
{
    // One committed delivery. The canonical line format is
    //   recv_time,target,sender,send_seq,kind\n
    // (decimal integers). Every engine emits exactly this, so the oracle
    // comparison is a plain byte diff.
    inline void append_trace_line(std::string &out, const Event &e)
    {
        out += std::to_string(e.recv_time);
        out += ',';
        out += std::to_string(e.target.id);
        out += ',';
        out += std::to_string(e.id.sender);
        out += ',';
        out += std::to_string(e.id.send_seq);
        out += ',';
        out += std::to_string(e.kind);
        out += '\n';
    }

    struct TraceDiff
    {
        std::size_t line = 0; // 1-based line number of the first divergence
        std::string left;
        std::string right;
    };

    namespace detail
    {
        // Pops one line (without the terminator) from a string view. Returns
        // false at end of input.
        inline bool next_line(std::string_view &rest, std::string_view &line)
        {
            if (rest.empty())
            {
                return false;
            }
            const auto nl = rest.find('\n');
            if (nl == std::string_view::npos)
            {
                line = rest;
                rest = {};
            }
            else
            {
                line = rest.substr(0, nl);
                rest.remove_prefix(nl + 1);
            }
            return true;
        }

        inline void check_trace_line(std::string_view line, std::size_t lineno)
        {
            int commas = 0;
            for (char c : line)
            {
                if (c == ',')
                {
                    ++commas;
                }
                else if (c < '0' || c > '9')
                {
                    throw DecodeError("malformed trace line " + std::to_string(lineno) + ": '" +
                                      std::string(line) + "'");
                }
            }
            if (commas != 4 || line.empty())
            {
                throw DecodeError("malformed trace line " + std::to_string(lineno) + ": '" +
                                  std::string(line) + "'");
            }
        }
    } // namespace detail

    // Line-wise byte comparison of two traces held in memory. Empty result
    // means identical. Malformed lines raise DecodeError.
    inline std::optional<TraceDiff> diff_traces(std::string_view a, std::string_view b)
    {
        std::string_view ra = a;
        std::string_view rb = b;
        std::size_t lineno = 0;
        while (true)
        {
            std::string_view la;
            std::string_view lb;
            const bool ha = detail::next_line(ra, la);
            const bool hb = detail::next_line(rb, lb);
            ++lineno;
            if (!ha && !hb)
            {
                return std::nullopt;
            }
            if (ha)
            {
                detail::check_trace_line(la, lineno);
            }
            if (hb)
            {
                detail::check_trace_line(lb, lineno);
            }
            if (!ha || !hb || la != lb)
            {
                return TraceDiff{lineno, ha ? std::string(la) : std::string("<end of trace>"),
                                 hb ? std::string(lb) : std::string("<end of trace>")};
            }
        }
    }

    inline std::string read_file(const std::string &path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in)
        {
            throw std::runtime_error("cannot open file: " + path);
        }
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    inline void write_file(const std::string &path, std::string_view contents)
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out)
        {
            throw std::runtime_error("cannot open file for writing: " + path);
        }
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    }

    inline std::optional<TraceDiff> diff_trace_files(const std::string &a, const std::string &b)
    {
        return diff_traces(read_file(a), read_file(b));
    }
} // namespace parsim
