// Copyright 2026 The farmwatch Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "farmwatch/snmp/oid.hpp"

namespace farmwatch::snmp {

using Bytes = std::vector<std::uint8_t>;

// Largest UDP payload over IPv4.
inline constexpr std::size_t kMaxDatagram = 65507;

namespace tag {
inline constexpr std::uint8_t kInteger = 0x02;
inline constexpr std::uint8_t kOctetString = 0x04;
inline constexpr std::uint8_t kNull = 0x05;
inline constexpr std::uint8_t kObjectId = 0x06;
inline constexpr std::uint8_t kSequence = 0x30;
inline constexpr std::uint8_t kCounter32 = 0x41;
inline constexpr std::uint8_t kGauge32 = 0x42;
inline constexpr std::uint8_t kTimeTicks = 0x43;
inline constexpr std::uint8_t kCounter64 = 0x46;
inline constexpr std::uint8_t kNoSuchObject = 0x80;
inline constexpr std::uint8_t kNoSuchInstance = 0x81;
inline constexpr std::uint8_t kEndOfMibView = 0x82;
inline constexpr std::uint8_t kGetRequest = 0xA0;
inline constexpr std::uint8_t kResponse = 0xA2;
}  // namespace tag

enum class Version : std::int32_t { V1 = 0, V2c = 1 };
enum class PduType : std::uint8_t { GetRequest = tag::kGetRequest, Response = tag::kResponse };

// RFC 3416 error-status values.
enum class ErrorStatus : std::int32_t {
  NoError = 0,
  TooBig = 1,
  NoSuchName = 2,
  BadValue = 3,
  ReadOnly = 4,
  GenErr = 5,
  NoAccess = 6,
  WrongType = 7,
  WrongLength = 8,
  WrongEncoding = 9,
  WrongValue = 10,
  NoCreation = 11,
  InconsistentValue = 12,
  ResourceUnavailable = 13,
  CommitFailed = 14,
  UndoFailed = 15,
  AuthorizationError = 16,
  NotWritable = 17,
  InconsistentName = 18,
};

inline constexpr std::int32_t kMaxErrorStatus = 18;

inline const char* error_status_name(std::int32_t status) {
  static constexpr const char* names[] = {
      "noError",     "tooBig",        "noSuchName",          "badValue",     "readOnly",
      "genErr",      "noAccess",      "wrongType",           "wrongLength",  "wrongEncoding",
      "wrongValue",  "noCreation",    "inconsistentValue",   "resourceUnavailable",
      "commitFailed", "undoFailed",   "authorizationError",  "notWritable",  "inconsistentName"};
  if (status < 0 || status > kMaxErrorStatus) return "unknownError";
  return names[status];
}

// Value alternatives of a variable binding.
struct Null {
  friend bool operator==(const Null&, const Null&) = default;
};
struct Integer {
  std::int32_t value = 0;
  friend bool operator==(const Integer&, const Integer&) = default;
};
struct Counter32 {
  std::uint32_t value = 0;
  friend bool operator==(const Counter32&, const Counter32&) = default;
};
struct Gauge32 {
  std::uint32_t value = 0;
  friend bool operator==(const Gauge32&, const Gauge32&) = default;
};
struct TimeTicks {
  std::uint32_t value = 0;
  friend bool operator==(const TimeTicks&, const TimeTicks&) = default;
};
struct Counter64 {
  std::uint64_t value = 0;
  friend bool operator==(const Counter64&, const Counter64&) = default;
};
struct OctetString {
  std::string value;
  friend bool operator==(const OctetString&, const OctetString&) = default;
};
struct ObjectId {
  Oid value;
  friend bool operator==(const ObjectId&, const ObjectId&) = default;
};
struct NoSuchObject {
  friend bool operator==(const NoSuchObject&, const NoSuchObject&) = default;
};
struct NoSuchInstance {
  friend bool operator==(const NoSuchInstance&, const NoSuchInstance&) = default;
};
struct EndOfMibView {
  friend bool operator==(const EndOfMibView&, const EndOfMibView&) = default;
};
// Any application/context tag the codec does not interpret (IpAddress, Opaque, ...).
struct RawValue {
  std::uint8_t tag = 0;
  std::string content;
  friend bool operator==(const RawValue&, const RawValue&) = default;
};

using Value = std::variant<Null, Integer, Counter32, Gauge32, TimeTicks, Counter64, OctetString, ObjectId,
                           NoSuchObject, NoSuchInstance, EndOfMibView, RawValue>;

inline bool is_exception(const Value& v) {
  return std::holds_alternative<NoSuchObject>(v) || std::holds_alternative<NoSuchInstance>(v) ||
         std::holds_alternative<EndOfMibView>(v);
}

struct VarBind {
  Oid oid;
  Value value = Null{};
  friend bool operator==(const VarBind&, const VarBind&) = default;
};

struct SnmpMessage {
  Version version = Version::V2c;
  std::string community = "public";
  PduType pdu_type = PduType::GetRequest;
  std::int32_t request_id = 0;
  std::int32_t error_status = 0;
  std::int32_t error_index = 0;
  std::vector<VarBind> varbinds;
  friend bool operator==(const SnmpMessage&, const SnmpMessage&) = default;
};

class DecodeError : public std::runtime_error {
 public:
  enum class Kind { Malformed, UnsupportedVersion };

  DecodeError(Kind kind, std::size_t offset, const std::string& what)
      : std::runtime_error(what + " at offset " + std::to_string(offset)), kind_(kind), offset_(offset) {}

  Kind kind() const noexcept { return kind_; }
  std::size_t offset() const noexcept { return offset_; }

 private:
  Kind kind_;
  std::size_t offset_;
};

class EncodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace ber {

inline void put_length(Bytes& out, std::size_t len) {
  if (len < 0x80) {
    out.push_back(static_cast<std::uint8_t>(len));
    return;
  }
  std::uint8_t buf[sizeof(std::size_t)];
  int n = 0;
  while (len > 0) {
    buf[n++] = static_cast<std::uint8_t>(len & 0xFF);
    len >>= 8;
  }
  out.push_back(static_cast<std::uint8_t>(0x80 | n));
  while (n > 0) out.push_back(buf[--n]);
}

inline void put_tlv(Bytes& out, std::uint8_t t, std::span<const std::uint8_t> content) {
  out.push_back(t);
  put_length(out, content.size());
  out.insert(out.end(), content.begin(), content.end());
}

// Minimal two's complement content octets.
inline Bytes signed_content(std::int64_t v) {
  Bytes b;
  for (int i = 7; i >= 0; --i) b.push_back(static_cast<std::uint8_t>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xFF));
  std::size_t start = 0;
  while (start + 1 < b.size() &&
         ((b[start] == 0x00 && !(b[start + 1] & 0x80)) || (b[start] == 0xFF && (b[start + 1] & 0x80)))) {
    ++start;
  }
  return Bytes(b.begin() + static_cast<std::ptrdiff_t>(start), b.end());
}

inline Bytes unsigned_content(std::uint64_t v) {
  Bytes b;
  for (int i = 7; i >= 0; --i) b.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
  std::size_t start = 0;
  while (start + 1 < b.size() && b[start] == 0x00 && !(b[start + 1] & 0x80)) ++start;
  Bytes out(b.begin() + static_cast<std::ptrdiff_t>(start), b.end());
  if (out.front() & 0x80) out.insert(out.begin(), 0x00);
  return out;
}

inline void put_base128(Bytes& out, std::uint64_t v) {
  std::uint8_t buf[10];
  int n = 0;
  do {
    buf[n++] = static_cast<std::uint8_t>(v & 0x7F);
    v >>= 7;
  } while (v > 0);
  while (n > 1) out.push_back(buf[--n] | 0x80);
  out.push_back(buf[0]);
}

inline Bytes oid_content(const Oid& oid) {
  const auto& arcs = oid.arcs();
  Bytes out;
  put_base128(out, std::uint64_t{40} * arcs[0] + arcs[1]);
  for (std::size_t i = 2; i < arcs.size(); ++i) put_base128(out, arcs[i]);
  return out;
}

// Bounded reader over one TLV's content. Offsets are absolute in the datagram.
class Reader {
 public:
  Reader(std::span<const std::uint8_t> data, std::size_t base) : data_(data), base_(base) {}

  bool at_end() const noexcept { return pos_ == data_.size(); }
  std::size_t offset() const noexcept { return base_ + pos_; }

  [[noreturn]] void fail(const std::string& what) const {
    throw DecodeError(DecodeError::Kind::Malformed, offset(), what);
  }

  std::uint8_t peek_tag() const {
    if (at_end()) fail("unexpected end of data");
    return data_[pos_];
  }

  // Reads a TLV header and returns a reader over its content.
  Reader read_tlv(std::uint8_t& t) {
    if (at_end()) fail("unexpected end of data");
    t = data_[pos_++];
    if ((t & 0x1F) == 0x1F) fail("multi-byte tags are not used by SNMP");
    if (at_end()) fail("missing length");
    std::size_t len = data_[pos_++];
    if (len == 0x80) fail("indefinite length");
    if (len & 0x80) {
      std::size_t n = len & 0x7F;
      if (n > 4) fail("length field too wide");
      if (data_.size() - pos_ < n) fail("truncated length");
      len = 0;
      for (std::size_t i = 0; i < n; ++i) len = (len << 8) | data_[pos_++];
    }
    if (len > data_.size() - pos_) fail("length overruns enclosing data");
    Reader sub(data_.subspan(pos_, len), base_ + pos_);
    pos_ += len;
    return sub;
  }

  Reader expect(std::uint8_t want, const char* what) {
    std::size_t at = offset();
    std::uint8_t t = 0;
    Reader sub = read_tlv(t);
    if (t != want) throw DecodeError(DecodeError::Kind::Malformed, at, std::string("expected ") + what);
    return sub;
  }

  std::span<const std::uint8_t> rest() const { return data_.subspan(pos_); }

  std::int64_t as_signed(std::size_t max_len) const {
    if (data_.empty()) fail("empty integer");
    if (data_.size() > max_len) fail("integer too long");
    std::int64_t v = (data_[0] & 0x80) ? -1 : 0;
    for (auto b : data_) v = static_cast<std::int64_t>((static_cast<std::uint64_t>(v) << 8) | b);
    return v;
  }

  std::uint64_t as_unsigned(int bits) const {
    if (data_.empty()) fail("empty integer");
    if (data_[0] & 0x80) fail("negative value for unsigned type");
    std::size_t start = 0;
    while (start + 1 < data_.size() && data_[start] == 0) ++start;
    if (data_.size() - start > static_cast<std::size_t>(bits / 8)) fail("unsigned value out of range");
    std::uint64_t v = 0;
    for (std::size_t i = start; i < data_.size(); ++i) v = (v << 8) | data_[i];
    return v;
  }

  Oid as_oid() const {
    if (data_.empty()) fail("empty object identifier");
    std::vector<std::uint32_t> arcs;
    std::uint64_t v = 0;
    bool first = true;
    std::size_t digits = 0;
    for (std::size_t i = 0; i < data_.size(); ++i) {
      std::uint8_t b = data_[i];
      if (digits == 0 && b == 0x80) fail("non-minimal subidentifier");
      v = (v << 7) | (b & 0x7F);
      if (++digits > 10 || v > (first ? std::uint64_t{80} + 0xFFFFFFFFull : 0xFFFFFFFFull)) {
        fail("subidentifier out of range");
      }
      if (!(b & 0x80)) {
        if (first) {
          if (v < 40) {
            arcs.push_back(0);
            arcs.push_back(static_cast<std::uint32_t>(v));
          } else if (v < 80) {
            arcs.push_back(1);
            arcs.push_back(static_cast<std::uint32_t>(v - 40));
          } else {
            arcs.push_back(2);
            arcs.push_back(static_cast<std::uint32_t>(v - 80));
          }
          first = false;
        } else {
          arcs.push_back(static_cast<std::uint32_t>(v));
        }
        v = 0;
        digits = 0;
      }
    }
    if (digits != 0) fail("truncated subidentifier");
    return Oid(std::move(arcs));
  }

  std::string as_string() const { return std::string(data_.begin(), data_.end()); }
  std::size_t size() const noexcept { return data_.size(); }

 private:
  std::span<const std::uint8_t> data_;
  std::size_t base_;
  std::size_t pos_ = 0;
};

}  // namespace ber

inline Bytes encode_oid(const Oid& oid) {
  Bytes out;
  ber::put_tlv(out, tag::kObjectId, ber::oid_content(oid));
  return out;
}

inline Oid decode_oid(std::span<const std::uint8_t> bytes) {
  ber::Reader top(bytes, 0);
  Oid oid = top.expect(tag::kObjectId, "OBJECT IDENTIFIER").as_oid();
  if (!top.at_end()) top.fail("trailing data after OBJECT IDENTIFIER");
  return oid;
}

namespace detail {

inline void encode_value(Bytes& out, const Value& value) {
  std::visit(
      [&out](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Null>) {
          ber::put_tlv(out, tag::kNull, {});
        } else if constexpr (std::is_same_v<T, Integer>) {
          ber::put_tlv(out, tag::kInteger, ber::signed_content(v.value));
        } else if constexpr (std::is_same_v<T, Counter32>) {
          ber::put_tlv(out, tag::kCounter32, ber::unsigned_content(v.value));
        } else if constexpr (std::is_same_v<T, Gauge32>) {
          ber::put_tlv(out, tag::kGauge32, ber::unsigned_content(v.value));
        } else if constexpr (std::is_same_v<T, TimeTicks>) {
          ber::put_tlv(out, tag::kTimeTicks, ber::unsigned_content(v.value));
        } else if constexpr (std::is_same_v<T, Counter64>) {
          ber::put_tlv(out, tag::kCounter64, ber::unsigned_content(v.value));
        } else if constexpr (std::is_same_v<T, OctetString>) {
          ber::put_tlv(out, tag::kOctetString,
                       std::span(reinterpret_cast<const std::uint8_t*>(v.value.data()), v.value.size()));
        } else if constexpr (std::is_same_v<T, ObjectId>) {
          ber::put_tlv(out, tag::kObjectId, ber::oid_content(v.value));
        } else if constexpr (std::is_same_v<T, NoSuchObject>) {
          ber::put_tlv(out, tag::kNoSuchObject, {});
        } else if constexpr (std::is_same_v<T, NoSuchInstance>) {
          ber::put_tlv(out, tag::kNoSuchInstance, {});
        } else if constexpr (std::is_same_v<T, EndOfMibView>) {
          ber::put_tlv(out, tag::kEndOfMibView, {});
        } else {
          ber::put_tlv(out, v.tag,
                       std::span(reinterpret_cast<const std::uint8_t*>(v.content.data()), v.content.size()));
        }
      },
      value);
}

inline Value decode_value(ber::Reader& r, Version version) {
  std::size_t at = r.offset();
  std::uint8_t t = 0;
  ber::Reader c = r.read_tlv(t);
  auto require_empty = [&](const char* what) {
    if (c.size() != 0) throw DecodeError(DecodeError::Kind::Malformed, at, std::string(what) + " with content");
  };
  auto v2c_only = [&](const char* what) {
    if (version != Version::V2c) {
      throw DecodeError(DecodeError::Kind::Malformed, at, std::string(what) + " in an SNMPv1 message");
    }
  };
  switch (t) {
    case tag::kNull:
      require_empty("NULL");
      return Null{};
    case tag::kInteger:
      return Integer{static_cast<std::int32_t>([&] {
        auto v = c.as_signed(5);
        if (v < std::numeric_limits<std::int32_t>::min() || v > std::numeric_limits<std::int32_t>::max()) {
          c.fail("INTEGER out of range");
        }
        return v;
      }())};
    case tag::kCounter32:
      return Counter32{static_cast<std::uint32_t>(c.as_unsigned(32))};
    case tag::kGauge32:
      return Gauge32{static_cast<std::uint32_t>(c.as_unsigned(32))};
    case tag::kTimeTicks:
      return TimeTicks{static_cast<std::uint32_t>(c.as_unsigned(32))};
    case tag::kCounter64:
      return Counter64{c.as_unsigned(64)};
    case tag::kOctetString:
      return OctetString{c.as_string()};
    case tag::kObjectId:
      return ObjectId{c.as_oid()};
    case tag::kNoSuchObject:
      v2c_only("noSuchObject");
      require_empty("noSuchObject");
      return NoSuchObject{};
    case tag::kNoSuchInstance:
      v2c_only("noSuchInstance");
      require_empty("noSuchInstance");
      return NoSuchInstance{};
    case tag::kEndOfMibView:
      v2c_only("endOfMibView");
      require_empty("endOfMibView");
      return EndOfMibView{};
    case tag::kSequence:
    case tag::kGetRequest:
    case tag::kResponse:
      throw DecodeError(DecodeError::Kind::Malformed, at, "constructed value in varbind");
    default:
      return RawValue{t, c.as_string()};
  }
}

inline Bytes wrap(std::uint8_t t, const Bytes& content) {
  Bytes out;
  out.reserve(content.size() + 6);
  ber::put_tlv(out, t, content);
  return out;
}

}  // namespace detail

// Encodes any structurally valid message. Throws std::invalid_argument on
// invariant violations and EncodeError when the result exceeds one datagram.
inline Bytes encode_message(const SnmpMessage& msg) {
  if (msg.error_status < 0 || msg.error_status > kMaxErrorStatus) {
    throw std::invalid_argument("error_status is not a defined SNMP error code");
  }
  if (msg.error_index < 0 || static_cast<std::size_t>(msg.error_index) > msg.varbinds.size()) {
    throw std::invalid_argument("error_index exceeds the number of varbinds");
  }
  Bytes vbl;
  for (const auto& vb : msg.varbinds) {
    if (vb.oid.empty()) throw std::invalid_argument("varbind without object identifier");
    if (msg.version == Version::V1 && is_exception(vb.value)) {
      throw std::invalid_argument("exception values require SNMPv2c");
    }
    Bytes one;
    ber::put_tlv(one, tag::kObjectId, ber::oid_content(vb.oid));
    detail::encode_value(one, vb.value);
    ber::put_tlv(vbl, tag::kSequence, one);
  }
  Bytes pdu;
  ber::put_tlv(pdu, tag::kInteger, ber::signed_content(msg.request_id));
  ber::put_tlv(pdu, tag::kInteger, ber::signed_content(msg.error_status));
  ber::put_tlv(pdu, tag::kInteger, ber::signed_content(msg.error_index));
  ber::put_tlv(pdu, tag::kSequence, vbl);

  Bytes body;
  ber::put_tlv(body, tag::kInteger, ber::signed_content(static_cast<std::int32_t>(msg.version)));
  ber::put_tlv(body, tag::kOctetString,
               std::span(reinterpret_cast<const std::uint8_t*>(msg.community.data()), msg.community.size()));
  ber::put_tlv(body, static_cast<std::uint8_t>(msg.pdu_type), pdu);

  Bytes out = detail::wrap(tag::kSequence, body);
  if (out.size() > kMaxDatagram) {
    throw EncodeError("encoded message of " + std::to_string(out.size()) + " bytes exceeds one UDP datagram");
  }
  return out;
}

// One GetRequest carrying a Null-valued binding per OID.
inline Bytes encode_get_request(Version version, const std::string& community, std::int32_t request_id,
                                std::span<const Oid> oids) {
  if (oids.empty()) throw std::invalid_argument("GetRequest needs at least one OID");
  if (community.empty()) throw std::invalid_argument("GetRequest needs a community string");
  SnmpMessage msg;
  msg.version = version;
  msg.community = community;
  msg.pdu_type = PduType::GetRequest;
  msg.request_id = request_id;
  msg.varbinds.reserve(oids.size());
  for (const auto& oid : oids) msg.varbinds.push_back({oid, Null{}});
  return encode_message(msg);
}

inline SnmpMessage decode_message(std::span<const std::uint8_t> bytes) {
  ber::Reader top(bytes, 0);
  ber::Reader msg_r = top.expect(tag::kSequence, "SEQUENCE");
  if (!top.at_end()) top.fail("trailing data after message");

  SnmpMessage msg;
  std::size_t version_at = msg_r.offset();
  auto version = msg_r.expect(tag::kInteger, "version INTEGER").as_signed(5);
  if (version != 0 && version != 1) {
    throw DecodeError(DecodeError::Kind::UnsupportedVersion, version_at,
                      "unsupported SNMP version " + std::to_string(version));
  }
  msg.version = static_cast<Version>(version);
  msg.community = msg_r.expect(tag::kOctetString, "community OCTET STRING").as_string();

  std::size_t pdu_at = msg_r.offset();
  std::uint8_t pdu_tag = 0;
  ber::Reader pdu = msg_r.read_tlv(pdu_tag);
  if (pdu_tag != tag::kGetRequest && pdu_tag != tag::kResponse) {
    throw DecodeError(DecodeError::Kind::Malformed, pdu_at, "unsupported PDU type");
  }
  if (!msg_r.at_end()) msg_r.fail("trailing data after PDU");
  msg.pdu_type = static_cast<PduType>(pdu_tag);

  auto read_int32 = [&pdu](const char* what) {
    ber::Reader c = pdu.expect(tag::kInteger, what);
    auto v = c.as_signed(5);
    if (v < std::numeric_limits<std::int32_t>::min() || v > std::numeric_limits<std::int32_t>::max()) {
      c.fail(std::string(what) + " out of range");
    }
    return static_cast<std::int32_t>(v);
  };
  msg.request_id = read_int32("request-id");
  std::size_t status_at = pdu.offset();
  msg.error_status = read_int32("error-status");
  if (msg.error_status < 0 || msg.error_status > kMaxErrorStatus) {
    throw DecodeError(DecodeError::Kind::Malformed, status_at, "undefined error-status");
  }
  std::size_t index_at = pdu.offset();
  msg.error_index = read_int32("error-index");

  ber::Reader vbl = pdu.expect(tag::kSequence, "varbind list");
  if (!pdu.at_end()) pdu.fail("trailing data after varbind list");
  while (!vbl.at_end()) {
    ber::Reader vb = vbl.expect(tag::kSequence, "varbind SEQUENCE");
    VarBind bind;
    bind.oid = vb.expect(tag::kObjectId, "varbind OBJECT IDENTIFIER").as_oid();
    bind.value = detail::decode_value(vb, msg.version);
    if (!vb.at_end()) vb.fail("trailing data in varbind");
    msg.varbinds.push_back(std::move(bind));
  }
  if (msg.error_index < 0 || static_cast<std::size_t>(msg.error_index) > msg.varbinds.size()) {
    throw DecodeError(DecodeError::Kind::Malformed, index_at, "error-index exceeds varbind count");
  }
  return msg;
}

}  // namespace farmwatch::snmp
