"""Pedigrees, theoretical kinship, and gene-drop identity coefficients.

Kinship coefficients come from the classical recurrence over a
topologically ordered pedigree: a founder has self-kinship 1/2, a
non-founder j with parents f and m has

    phi(j, j) = 1/2 + phi(f, m) / 2
    phi(i, j) = (phi(i, f) + phi(i, m)) / 2      for i processed before j

Founders are pairwise unrelated. The nine condensed identity-state
probabilities are estimated by Monte Carlo gene dropping: every founder
receives two unique allele labels per replicate, each non-founder
inherits one uniformly chosen allele from each parent, and states are
tallied from the four genes of each pair. The self pair (i, i) is
treated as two literal gene samples from the same individual, so a
non-inbred self pair always lands in state 7.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError, StructureError
from .snpcore import SubjectInfo, _read_fam

_GENE_DROP_CHUNK = 20_000  # replicates per RNG stream; fixed so threads never matter


@dataclass(frozen=True)
class PedMember:
    individual: str
    father: str | None = None
    mother: str | None = None

    @property
    def is_founder(self):
        return self.father is None


class Pedigree:
    """Validated pedigree: resolvable parents, both-or-neither, acyclic."""

    def __init__(self, members):
        members = list(members)
        ids = [m.individual for m in members]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise StructureError(f"duplicate individual ids: {dupes}")
        index = {m.individual: i for i, m in enumerate(members)}
        father_idx = np.full(len(members), -1, dtype=np.int64)
        mother_idx = np.full(len(members), -1, dtype=np.int64)
        for i, m in enumerate(members):
            if (m.father is None) != (m.mother is None):
                raise StructureError(
                    f"individual {m.individual}: one parent known, one unknown"
                )
            if m.father is not None:
                for which, pid in (("father", m.father), ("mother", m.mother)):
                    if pid not in index:
                        raise StructureError(
                            f"individual {m.individual}: {which} {pid!r} not in pedigree"
                        )
                father_idx[i] = index[m.father]
                mother_idx[i] = index[m.mother]
        self.members = tuple(members)
        self.index = index
        self.father_idx = father_idx
        self.mother_idx = mother_idx
        self.topo_order = self._topological_order()

    def __len__(self):
        return len(self.members)

    @property
    def ids(self):
        return [m.individual for m in self.members]

    def _topological_order(self):
        n = len(self.members)
        n_deps = np.zeros(n, dtype=np.int64)
        children = [[] for _ in range(n)]
        for i in range(n):
            for p in (self.father_idx[i], self.mother_idx[i]):
                if p >= 0:
                    n_deps[i] += 1
                    children[p].append(i)
        order = [i for i in range(n) if n_deps[i] == 0]
        head = 0
        while head < len(order):
            cur = order[head]
            head += 1
            for child in children[cur]:
                n_deps[child] -= 1
                if n_deps[child] == 0:
                    order.append(child)
        if len(order) != n:
            stuck = [self.members[i].individual for i in range(n) if n_deps[i] > 0]
            raise StructureError(f"pedigree contains a cycle through: {stuck}")
        return order

    @classmethod
    def from_fam(cls, fam_path):
        """Parents read from the father/mother columns; '0' means unknown."""
        records = _read_fam(fam_path)
        return cls.from_subject_meta(records)

    @classmethod
    def from_subject_meta(cls, records: list[SubjectInfo]):
        """'0' or an id absent from the file counts as an unknown parent."""
        known = {r.iid for r in records}
        members = []
        for r in records:
            father = r.father if r.father not in ("0", "") and r.father in known else None
            mother = r.mother if r.mother not in ("0", "") and r.mother in known else None
            if (father is None) != (mother is None):
                raise StructureError(
                    f"individual {r.iid}: only one parent resolvable in pedigree"
                )
            members.append(PedMember(r.iid, father, mother))
        return cls(members)


@dataclass(frozen=True)
class KinshipMatrix:
    """Symmetric kinship estimates tagged by the estimator that made them."""

    values: np.ndarray
    estimator: str
    subject_ids: tuple

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ArgumentError(f"kinship matrix must be square, got {v.shape}")
        if len(self.subject_ids) != v.shape[0]:
            raise ArgumentError("subject id count does not match matrix size")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "subject_ids", tuple(self.subject_ids))

    @property
    def n(self):
        return self.values.shape[0]


def theoretical_kinship(ped: Pedigree) -> KinshipMatrix:
    """Full kinship matrix from the pedigree recurrence.

    Every entry is a dyadic rational, and the recurrence uses only exact
    binary operations, so results are exact in double precision.
    """
    n = len(ped)
    phi = np.zeros((n, n))
    seen = []
    for j in ped.topo_order:
        f, m = ped.father_idx[j], ped.mother_idx[j]
        if f < 0:
            phi[j, j] = 0.5
            # founders share no ancestry with anyone processed so far
        else:
            phi[j, j] = 0.5 + 0.5 * phi[f, m]
            for i in seen:
                val = 0.5 * (phi[i, f] + phi[i, m])
                phi[i, j] = val
                phi[j, i] = val
        seen.append(j)
    return KinshipMatrix(phi, "theoretical", tuple(ped.ids))


@dataclass(frozen=True)
class IdentityCoefficients:
    """Jacquard's nine condensed identity-state probabilities for one pair."""

    id1: str
    id2: str
    delta: np.ndarray  # shape (9,)

    @property
    def kinship(self):
        d = self.delta
        return d[0] + 0.5 * (d[2] + d[4] + d[6]) + 0.25 * d[7]


@dataclass(frozen=True)
class GeneDropResult:
    coefficients: list
    kinship: KinshipMatrix
    n_replicates: int
    flagged_pairs: list = field(default_factory=list)


def gene_drop(ped: Pedigree, n_replicates, seed=0, check_against=None,
              threads=1) -> GeneDropResult:
    """Monte Carlo condensed identity coefficients for all pairs i <= j.

    Replicates are simulated in fixed-size chunks with RNG streams spawned
    from ``seed``, so results depend only on (seed, n_replicates) and never
    on ``threads``; chunk tallies are summed in chunk order. When
    ``check_against`` (a theoretical KinshipMatrix) is given, pairs whose
    estimate falls outside 4*sqrt(phi(1-phi)/R) are flagged, not failed.
    """
    if n_replicates < 1:
        raise ArgumentError(f"n_replicates must be >= 1, got {n_replicates}")
    n = len(ped)
    pairs = [(i, j) for i in range(n) for j in range(i, n)]

    chunks = [
        min(_GENE_DROP_CHUNK, n_replicates - done)
        for done in range(0, n_replicates, _GENE_DROP_CHUNK)
    ]
    streams = np.random.SeedSequence(seed).spawn(len(chunks))
    founder_label = np.cumsum([2 * (ped.father_idx[i] < 0) for i in range(n)])

    def drop_chunk(task):
        size, ss = task
        rng = np.random.default_rng(ss)
        alleles = np.empty((size, n, 2), dtype=np.int64)
        for j in ped.topo_order:
            f, m = ped.father_idx[j], ped.mother_idx[j]
            if f < 0:
                alleles[:, j, 0] = founder_label[j] - 2
                alleles[:, j, 1] = founder_label[j] - 1
            else:
                pick = rng.integers(0, 2, size=(size, 2))
                alleles[:, j, 0] = alleles[np.arange(size), f, pick[:, 0]]
                alleles[:, j, 1] = alleles[np.arange(size), m, pick[:, 1]]
        out = np.zeros((len(pairs), 9), dtype=np.int64)
        for pi, (i, j) in enumerate(pairs):
            states = _condensed_states(
                alleles[:, i, 0], alleles[:, i, 1], alleles[:, j, 0], alleles[:, j, 1]
            )
            out[pi] = np.bincount(states, minlength=9)
        return out

    from .util import parallel_map

    chunk_counts = parallel_map(drop_chunk, list(zip(chunks, streams)), threads)
    counts = np.zeros((len(pairs), 9), dtype=np.int64)
    for c in chunk_counts:
        counts += c

    phi = np.zeros((n, n))
    coefficients = []
    flagged = []
    for pi, (i, j) in enumerate(pairs):
        delta = counts[pi] / float(n_replicates)
        rec = IdentityCoefficients(ped.ids[i], ped.ids[j], delta)
        coefficients.append(rec)
        phi[i, j] = phi[j, i] = rec.kinship
        if check_against is not None:
            truth = check_against.values[i, j]
            bound = 4.0 * np.sqrt(max(truth * (1 - truth), 0.0) / n_replicates)
            if abs(rec.kinship - truth) > bound:
                flagged.append((ped.ids[i], ped.ids[j], rec.kinship, truth))
    kin = KinshipMatrix(phi, "gene-drop", tuple(ped.ids))
    return GeneDropResult(coefficients, kin, int(n_replicates), flagged)


def _condensed_states(a1, a2, b1, b2):
    """Classify gene quadruples into Jacquard's condensed states 0..8.

    States follow the standard numbering (state k stored at index k-1).
    """
    ii = a1 == a2
    jj = b1 == b2
    c11 = a1 == b1
    c12 = a1 == b2
    c21 = a2 == b1
    c22 = a2 == b2
    cross = (
        c11.astype(np.int8) + c12.astype(np.int8) + c21.astype(np.int8) + c22.astype(np.int8)
    )
    states = np.empty(a1.shape, dtype=np.int8)
    both = ii & jj
    states[both & c11] = 0
    states[both & ~c11] = 1
    one_b = ii & ~jj
    states[one_b & (c11 | c12)] = 2
    states[one_b & ~(c11 | c12)] = 3
    one_a = ~ii & jj
    states[one_a & (c11 | c21)] = 4
    states[one_a & ~(c11 | c21)] = 5
    neither = ~ii & ~jj
    states[neither & (cross == 2)] = 6
    states[neither & (cross == 1)] = 7
    states[neither & (cross == 0)] = 8
    return states
