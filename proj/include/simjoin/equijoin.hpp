#pragma once

#include <cstdint>
#include <functional>

#include "simjoin/bitvec.hpp"
#include "simjoin/lsh.hpp"
#include "simjoin/mpc.hpp"

namespace simjoin {

/// Join key: bucket identity for one hash draw.
struct TupleKey {
    int level = 0;
    int repetition = 0;
    HashValue hash{};

    friend bool operator==(const TupleKey&, const TupleKey&) = default;
    friend auto operator<=>(const TupleKey&, const TupleKey&) = default;
};

/// One bucket-membership record flowing through the simulated cluster.
/// ann_a / ann_b hold prefix-sum annotations (R-count and S-count, or other
/// per-stage bookkeeping); cell is the grid-cell tag during join routing.
struct KeyedTuple {
    TupleKey key;
    std::int64_t id = 0;
    Relation rel = Relation::R;
    bool active = true;
    int origin = 0;
    std::int64_t ann_a = 0;
    std::int64_t ann_b = 0;
    std::int64_t cell = -1;
};

/// Receives each materialized (R-tuple, S-tuple) pair exactly once, on the
/// processor that holds both copies.
using PairSink = std::function<void(const KeyedTuple&, const KeyedTuple&)>;

struct EquiJoinStats {
    int rounds = 0;
    std::int64_t tuples_in = 0;
    std::int64_t pairs_emitted = 0;
};

/// Joins the tuples currently held by the cluster on exact key equality.
/// For every key g, each pair in R_g x S_g reaches the sink exactly once.
/// Consumes the input tuples; after the call each processor holds the
/// (replicated) tuples of its assigned grid cells.
///
/// Plan: global sort by (key, relation); two prefix sums annotate R/S counts;
/// keys are allocated processor slots by largest remainder on p*O_g/O_total
/// (every nonempty key keeps at least a shared slot); each multi-slot key's
/// R_g x S_g rectangle is covered by a near-square grid, filled in two rounds
/// (scatter to a home cell, then an in-row/in-column gather) so neither the
/// senders nor the receivers exceed the grid's per-cell share; single-slot
/// keys are hashed onto shared processors. The slot table for multi-slot keys
/// (at most p entries) is broadcast. 9 accounted rounds total.
EquiJoinStats equi_join(mpc::Cluster<KeyedTuple>& cluster, const PairSink& sink);

/// Reference load for an equi-join with n input tuples, `out` result pairs
/// and p processors: sqrt(out/p) + n/p, constants 1. Reporting only.
double join_load_bound(double n, double out, int p);

}  // namespace simjoin
