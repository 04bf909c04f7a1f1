#include "streamspan/streamsort_runtime.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <system_error>

#include "streamspan/errors.hpp"

#ifdef __unix__
#include <unistd.h>
#endif

namespace streamspan::streamsort {

StreamRecord make_vertex_record(VertexId v) {
    StreamRecord r;
    r.kind = RecordKind::vertex;
    r.id = v;
    r.own_center = v;
    r.weight = std::numeric_limits<double>::infinity();
    return r;
}

StreamRecord make_edge_record(VertexId u, VertexId v, Weight w) {
    StreamRecord r;
    r.kind = RecordKind::edge;
    r.id = u;
    r.other = v;
    r.own_center = u;
    r.other_center = v;
    r.weight = w;
    return r;
}

namespace {

void put_u32(unsigned char* p, std::uint32_t v) {
    p[0] = static_cast<unsigned char>(v);
    p[1] = static_cast<unsigned char>(v >> 8);
    p[2] = static_cast<unsigned char>(v >> 16);
    p[3] = static_cast<unsigned char>(v >> 24);
}

std::uint32_t get_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

} // namespace

void encode_record(const StreamRecord& r, unsigned char* out) {
    out[0] = static_cast<unsigned char>(r.kind);
    put_u32(out + 1, r.id);
    put_u32(out + 5, r.other);
    put_u32(out + 9, r.own_center);
    put_u32(out + 13, r.other_center);
    std::uint64_t bits = 0;
    std::memcpy(&bits, &r.weight, sizeof bits);
    for (int i = 0; i < 8; ++i) out[17 + i] = static_cast<unsigned char>(bits >> (8 * i));
    out[25] = static_cast<unsigned char>(r.spanner_mark);
    out[26] = r.sampled ? 1 : 0;
}

StreamRecord decode_record(const unsigned char* in) {
    StreamRecord r;
    r.kind = in[0] == 0 ? RecordKind::vertex : RecordKind::edge;
    r.id = get_u32(in + 1);
    r.other = get_u32(in + 5);
    r.own_center = get_u32(in + 9);
    r.other_center = get_u32(in + 13);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(in[17 + i]) << (8 * i);
    std::memcpy(&r.weight, &bits, sizeof r.weight);
    r.spanner_mark = static_cast<std::int8_t>(in[25]);
    r.sampled = in[26] != 0;
    return r;
}

namespace detail {

FileBacking::~FileBacking() {
    std::error_code ec;
    std::filesystem::remove(path, ec);
}

} // namespace detail

std::size_t RecordSequence::size() const {
    if (mem_) return mem_->size();
    if (file_) return file_->count;
    return 0;
}

std::vector<StreamRecord> RecordSequence::materialize() const {
    if (mem_) return *mem_;
    std::vector<StreamRecord> out;
    out.reserve(size());
    auto c = cursor();
    StreamRecord r;
    while (c.next(r)) out.push_back(r);
    return out;
}

RecordSequence::Cursor RecordSequence::cursor() const {
    Cursor c;
    c.mem_ = mem_;
    c.file_ = file_;
    if (file_) {
        c.in_.open(file_->path, std::ios::binary);
        if (!c.in_) throw std::runtime_error("cannot reopen stream file " + file_->path.string());
        c.remaining_ = file_->count;
    }
    return c;
}

bool RecordSequence::Cursor::next(StreamRecord& out) {
    if (mem_) {
        if (pos_ >= mem_->size()) return false;
        out = (*mem_)[pos_++];
        return true;
    }
    if (file_) {
        if (remaining_ == 0) return false;
        unsigned char buf[kRecordBytes];
        if (!in_.read(reinterpret_cast<char*>(buf), kRecordBytes))
            throw std::runtime_error("stream file truncated: " + file_->path.string());
        out = decode_record(buf);
        --remaining_;
        return true;
    }
    return false;
}

namespace {

std::filesystem::path unique_stream_path(const std::filesystem::path& tmpdir) {
    static std::atomic<std::uint64_t> counter{0};
#ifdef __unix__
    const auto pid = static_cast<std::uint64_t>(::getpid());
#else
    const std::uint64_t pid = 0;
#endif
    return tmpdir / ("streamspan-" + std::to_string(pid) + "-" +
                     std::to_string(counter.fetch_add(1)) + ".rec");
}

} // namespace

RecordSink::RecordSink(Storage storage, const std::filesystem::path& tmpdir)
    : storage_(storage) {
    if (storage_ == Storage::file) {
        file_ = std::make_shared<detail::FileBacking>();
        file_->path = unique_stream_path(tmpdir);
        out_ = std::make_unique<std::ofstream>(file_->path, std::ios::binary);
        if (!*out_) throw std::runtime_error("cannot create stream file " + file_->path.string());
    }
}

void RecordSink::append(const StreamRecord& r) {
    if (storage_ == Storage::memory) {
        mem_.push_back(r);
    } else {
        unsigned char buf[kRecordBytes];
        encode_record(r, buf);
        out_->write(reinterpret_cast<const char*>(buf), kRecordBytes);
    }
    ++count_;
}

RecordSequence RecordSink::finish() {
    RecordSequence seq;
    if (storage_ == Storage::memory) {
        seq.mem_ = std::make_shared<const std::vector<StreamRecord>>(std::move(mem_));
    } else {
        out_->flush();
        if (!*out_) throw std::runtime_error("failed writing stream file " + file_->path.string());
        out_.reset();
        file_->count = count_;
        seq.file_ = file_;
    }
    return seq;
}

Runtime::Runtime(Storage storage, std::filesystem::path tmpdir)
    : storage_(storage), tmpdir_(std::move(tmpdir)) {
    if (storage_ == Storage::file && tmpdir_.empty()) {
        if (const char* env = std::getenv("STREAMSPAN_TMPDIR"))
            tmpdir_ = env;
        else
            tmpdir_ = std::filesystem::temp_directory_path();
    }
}

RecordSequence Runtime::stream_pass(const RecordSequence& in, Transducer& t) {
    RecordSink out = make_sink();
    std::size_t max_state = t.state_size();
    auto cur = in.cursor();
    StreamRecord r;
    while (cur.next(r)) {
        t.on_record(r, out);
        const std::size_t s = t.state_size();
        max_state = std::max(max_state, s);
        if (s > t.state_budget())
            throw StateBudgetError(std::string(t.name()) + ": state " + std::to_string(s) +
                                   " exceeds budget " + std::to_string(t.state_budget()));
    }
    t.finish(out);

    ++accounting_.stream_passes;
    accounting_.records_read += in.size();
    accounting_.max_state_records = std::max(accounting_.max_state_records, max_state);
    accounting_.passes.push_back(
        {std::string(t.name()), false, in.size(), out.written(), max_state});
    return out.finish();
}

void Runtime::note_stream_pass(std::string name, std::size_t records_in,
                               std::size_t records_out, std::size_t max_state) {
    ++accounting_.stream_passes;
    accounting_.records_read += records_in;
    accounting_.max_state_records = std::max(accounting_.max_state_records, max_state);
    accounting_.passes.push_back({std::move(name), false, records_in, records_out, max_state});
}

RecordSequence Runtime::sort_pass(const RecordSequence& in, const RecordLess& less,
                                  std::string_view name) {
    std::vector<StreamRecord> records = in.materialize();
    std::stable_sort(records.begin(), records.end(), less);

    RecordSink out = make_sink();
    for (const auto& r : records) out.append(r);

    ++accounting_.sort_passes;
    accounting_.records_read += in.size();
    accounting_.passes.push_back({std::string(name), true, in.size(), records.size(), 0});
    return out.finish();
}

bool order0_less(const StreamRecord& a, const StreamRecord& b) {
    if (a.kind != b.kind) return a.kind == RecordKind::vertex;
    if (a.kind == RecordKind::vertex) return a.id < b.id;
    const VertexId alo = std::min(a.id, a.other), ahi = std::max(a.id, a.other);
    const VertexId blo = std::min(b.id, b.other), bhi = std::max(b.id, b.other);
    if (alo != blo) return alo < blo;
    if (ahi != bhi) return ahi < bhi;
    if (a.id != b.id) return a.id < b.id;
    if (a.other != b.other) return a.other < b.other;
    return a.weight < b.weight;
}

bool GroupLess::operator()(const StreamRecord& a, const StreamRecord& b) const {
    auto first_key = [this](const StreamRecord& r) {
        return order.first == ClusterKey::label ? r.id : r.own_center;
    };
    auto second_key = [this](const StreamRecord& r) {
        if (r.kind == RecordKind::vertex)
            return order.second == ClusterKey::label ? r.id : r.own_center;
        return order.second == ClusterKey::label ? r.other : r.other_center;
    };
    auto kind_rank = [this](const StreamRecord& r) {
        const bool vertex_first = order.placement == VertexPlacement::before_edges;
        return (r.kind == RecordKind::vertex) == vertex_first ? 0 : 1;
    };

    const VertexId a1 = first_key(a), b1 = first_key(b);
    if (a1 != b1) return a1 < b1;
    const int ar = kind_rank(a), br = kind_rank(b);
    if (ar != br) return ar < br;
    const VertexId a2 = second_key(a), b2 = second_key(b);
    if (a2 != b2) return a2 < b2;
    if (order.weight_key && a.kind == RecordKind::edge && b.kind == RecordKind::edge &&
        a.weight != b.weight)
        return a.weight < b.weight;
    if (a.id != b.id) return a.id < b.id;
    return a.other < b.other;
}

} // namespace streamspan::streamsort
