#pragma once

#include "parsim/types.hpp"

#include <cstring>
#include <string>

namespace parsim
{
    // Little-endian fixed-width serialization helpers. Entity states, rng
    // positions and migration envelopes all go through these so that a
    // serialize/deserialize round trip is the identity byte-for-byte.
    class ByteWriter
    {
    public:
        void u8(std::uint8_t v) { buf_.push_back(static_cast<std::byte>(v)); }

        void u32(std::uint32_t v)
        {
            for (int i = 0; i < 4; ++i)
            {
                buf_.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xff));
            }
        }

        void u64(std::uint64_t v)
        {
            for (int i = 0; i < 8; ++i)
            {
                buf_.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xff));
            }
        }

        void bytes(const Payload &p)
        {
            u64(p.size());
            buf_.insert(buf_.end(), p.begin(), p.end());
        }

        const Payload &data() const { return buf_; }
        Payload take() { return std::move(buf_); }

    private:
        Payload buf_;
    };

    class ByteReader
    {
    public:
        explicit ByteReader(const Payload &buf) : buf_(buf) {}

        std::uint8_t u8()
        {
            need(1);
            return static_cast<std::uint8_t>(buf_[pos_++]);
        }

        std::uint32_t u32()
        {
            need(4);
            std::uint32_t v = 0;
            for (int i = 0; i < 4; ++i)
            {
                v |= static_cast<std::uint32_t>(buf_[pos_++]) << (8 * i);
            }
            return v;
        }

        std::uint64_t u64()
        {
            need(8);
            std::uint64_t v = 0;
            for (int i = 0; i < 8; ++i)
            {
                v |= static_cast<std::uint64_t>(buf_[pos_++]) << (8 * i);
            }
            return v;
        }

        Payload bytes()
        {
            const std::uint64_t n = u64();
            need(n);
            Payload out(buf_.begin() + static_cast<std::ptrdiff_t>(pos_),
                        buf_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
            pos_ += n;
            return out;
        }

        bool exhausted() const { return pos_ == buf_.size(); }

        void expect_end() const
        {
            if (!exhausted())
            {
                throw DecodeError("trailing bytes after decoded value");
            }
        }

    private:
        void need(std::uint64_t n) const
        {
            if (pos_ + n > buf_.size())
            {
                throw DecodeError("truncated byte sequence (need " + std::to_string(n) +
                                  " at offset " + std::to_string(pos_) + ", have " +
                                  std::to_string(buf_.size()) + ")");
            }
        }

        const Payload &buf_;
        std::size_t pos_ = 0;
    };
} // namespace parsim
