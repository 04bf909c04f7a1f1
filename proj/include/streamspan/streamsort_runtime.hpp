#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "streamspan/core_model.hpp"

namespace streamspan::streamsort {

enum class RecordKind : std::uint8_t { vertex = 0, edge = 1 };

// One record of the working stream. Every undirected edge travels as two
// oriented occurrences (u,v) and (v,u); vertex records carry the per-vertex
// routing state between passes.
struct StreamRecord {
    RecordKind kind = RecordKind::edge;
    VertexId id = kNoVertex;           // edge: owner endpoint; vertex: the vertex
    VertexId other = kNoVertex;        // edge: far endpoint; vertex: chosen hook endpoint
    VertexId own_center = kNoVertex;   // cluster center of id
    VertexId other_center = kNoVertex; // edge only: cluster center of other
    Weight weight = 0.0;               // edge: w(u,v); vertex: nearest sampled weight (inf = none)
    std::int8_t spanner_mark = 0;      // edge only: +1 keep, -1 drop, 0 undecided
    bool sampled = false;              // id's cluster is sampled this iteration

    friend bool operator==(const StreamRecord&, const StreamRecord&) = default;
};

StreamRecord make_vertex_record(VertexId v);
StreamRecord make_edge_record(VertexId u, VertexId v, Weight w);

// Fixed-width little-endian layout, 27 bytes:
//   [0]      kind
//   [1..16]  id, other, own_center, other_center (4 x u32)
//   [17..24] weight (f64 bits)
//   [25]     spanner_mark as signed byte
//   [26]     sampled
inline constexpr std::size_t kRecordBytes = 27;
void encode_record(const StreamRecord& r, unsigned char* out);
StreamRecord decode_record(const unsigned char* in);

enum class Storage { memory, file };

namespace detail {
struct FileBacking {
    std::filesystem::path path;
    std::size_t count = 0;
    ~FileBacking();
};
} // namespace detail

// Immutable record sequence, replayable through cursors.
class RecordSequence {
public:
    RecordSequence() = default;

    std::size_t size() const;
    std::vector<StreamRecord> materialize() const;

    class Cursor {
    public:
        bool next(StreamRecord& out);

    private:
        friend class RecordSequence;
        std::shared_ptr<const std::vector<StreamRecord>> mem_;
        std::size_t pos_ = 0;
        std::shared_ptr<const detail::FileBacking> file_;
        std::ifstream in_;
        std::size_t remaining_ = 0;
    };
    Cursor cursor() const;

private:
    friend class RecordSink;
    std::shared_ptr<const std::vector<StreamRecord>> mem_;
    std::shared_ptr<const detail::FileBacking> file_;
};

// Append-only writer; records cannot be revisited once appended.
class RecordSink {
public:
    RecordSink(Storage storage, const std::filesystem::path& tmpdir);
    RecordSink(RecordSink&&) = default;
    RecordSink& operator=(RecordSink&&) = default;

    void append(const StreamRecord& r);
    std::size_t written() const { return count_; }
    RecordSequence finish();

private:
    Storage storage_ = Storage::memory;
    std::vector<StreamRecord> mem_;
    std::shared_ptr<detail::FileBacking> file_;
    std::unique_ptr<std::ofstream> out_;
    std::size_t count_ = 0;
};

inline constexpr std::size_t kDefaultStateBudget = 4;

// Per-record callback with an enforced memory budget: state_size() reports
// the records plus scalar words the transducer holds, and a stream pass
// aborts if it ever exceeds state_budget().
class Transducer {
public:
    virtual ~Transducer() = default;
    virtual void on_record(const StreamRecord& r, RecordSink& out) = 0;
    virtual void finish(RecordSink& out) { (void)out; }
    virtual std::size_t state_size() const = 0;
    virtual std::size_t state_budget() const { return kDefaultStateBudget; }
    virtual std::string_view name() const = 0;
};

struct PassStats {
    std::string name;
    bool is_sort = false;
    std::size_t records_in = 0;
    std::size_t records_out = 0;
    std::size_t max_state = 0; // stream passes only
};

struct PassAccounting {
    std::uint64_t stream_passes = 0;
    std::uint64_t sort_passes = 0;
    std::size_t max_state_records = 0;
    std::uint64_t records_read = 0;
    std::vector<PassStats> passes;

    std::uint64_t total_passes() const { return stream_passes + sort_passes; }
};

using RecordLess = std::function<bool(const StreamRecord&, const StreamRecord&)>;

// Executes passes and keeps the books. Sorting may buffer the whole
// sequence in memory regardless of storage mode; transducer state in
// stream passes is what the budget polices.
class Runtime {
public:
    explicit Runtime(Storage storage = Storage::memory, std::filesystem::path tmpdir = {});

    RecordSequence stream_pass(const RecordSequence& in, Transducer& t);
    RecordSequence sort_pass(const RecordSequence& in, const RecordLess& less,
                             std::string_view name);

    RecordSink make_sink() const { return RecordSink(storage_, tmpdir_); }
    Storage storage() const { return storage_; }
    const PassAccounting& accounting() const { return accounting_; }

    // Book a stream pass executed outside stream_pass (input ingestion).
    void note_stream_pass(std::string name, std::size_t records_in, std::size_t records_out,
                          std::size_t max_state);

private:
    Storage storage_;
    std::filesystem::path tmpdir_;
    PassAccounting accounting_;
};

// Pairing order: vertex records first (by id), then edge occurrences keyed
// by unordered endpoints, so (u,v) and (v,u) end up adjacent. Ties close by
// oriented pair then weight; stable sorting settles the rest.
bool order0_less(const StreamRecord& a, const StreamRecord& b);

// Cluster-grouping orders. `label` keys by the vertex id itself (the
// identity clustering), `center` by the current cluster center fields.
enum class ClusterKey { label, center };
enum class VertexPlacement { before_edges, after_edges };

struct GroupOrder {
    ClusterKey first = ClusterKey::center;
    ClusterKey second = ClusterKey::label;
    VertexPlacement placement = VertexPlacement::before_edges;
    bool weight_key = false;
};

struct GroupLess {
    GroupOrder order;
    bool operator()(const StreamRecord& a, const StreamRecord& b) const;
};

} // namespace streamspan::streamsort
