"""Search for nested 16-item stimulus designs with prescribed level orderings.

Used once to produce the frozen hierarchy fixtures under ``tests/fixtures``.
Evaluation works on raw integer counts and is independent of the
``catutil`` implementation.  Entropy-based ties are decided exactly by
writing every level mean as a rational combination of logarithms of primes.

Level means are per-dimension sums averaged over the categories of a
level, so a dimension's contribution is unchanged by swapping isomorphic
sibling subtrees.  Columns are therefore enumerated up to those swaps, and
four-dimension designs are assembled by a meet-in-the-middle match on the
exact equality constraints, then filtered by the strict inequalities.

    python scripts/design_fixtures.py tools --out tests/fixtures/tools
    python scripts/design_fixtures.py family --target middle --out tests/fixtures/family_middle
"""

from __future__ import annotations

import argparse
import itertools
import json
import math
import random
from collections import Counter, defaultdict
from fractions import Fraction
from functools import lru_cache

import numpy as np

N_ITEMS = 16
PAIR = [None, None]
BASIC = [PAIR, PAIR]
# superordinate level: one category of three basic categories, one of a single basic category
TOOLS_TREE = [[BASIC, BASIC, BASIC], [BASIC]]
BALANCED_TREE = [[BASIC, BASIC], [BASIC, BASIC]]


def _leaves(node) -> int:
    return 1 if node is None else sum(_leaves(ch) for ch in node)


def levels_of(tree) -> list[list[list[int]]]:
    """Item groups of the three levels below the root (items numbered by leaf order)."""
    levels: list[list[list[int]]] = [[], [], []]

    def walk(node, depth, start):
        size = _leaves(node)
        if 1 <= depth <= 3:
            levels[depth - 1].append(list(range(start, start + size)))
        if node is not None:
            for ch in node:
                walk(ch, depth + 1, start)
                start += _leaves(ch)

    walk(tree, 0, 0)
    return levels


def _freeze(node):
    return None if node is None else tuple(_freeze(ch) for ch in node)


def canonical_columns(tree, n_values: int) -> list[tuple[int, ...]]:
    """Columns up to swapping isomorphic siblings, with values in first-appearance order."""

    @lru_cache(maxsize=None)
    def forms_of(node):
        if node is None:
            return [(v,) for v in range(n_values)]
        groups = defaultdict(list)
        for ch in node:
            groups[ch].append(ch)
        per_group = []
        for chs in groups.values():
            sub = forms_of(chs[0])
            combos = itertools.combinations_with_replacement(range(len(sub)), len(chs))
            per_group.append([tuple(x for i in combo for x in sub[i]) for combo in combos])
        return [tuple(x for part in prod for x in part) for prod in itertools.product(*per_group)]

    out = []
    for col in forms_of(_freeze(tree)):
        seen: list[int] = []
        for v in col:
            if v not in seen:
                seen.append(v)
        if seen == list(range(len(seen))):
            out.append(col)
    return out


@lru_cache(maxsize=None)
def _factor(n: int) -> tuple[tuple[int, int], ...]:
    out: dict[int, int] = defaultdict(int)
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] += 1
            n //= p
        p += 1
    if n > 1:
        out[n] += 1
    return tuple(out.items())


class LogForm:
    """Exact value  sum_p coef_p * log2(p)  over primes p."""

    def __init__(self, coefs=None):
        self.coefs: dict[int, Fraction] = defaultdict(Fraction, coefs or {})

    def add_nlogn(self, n: int, scale: Fraction):
        if n > 1:
            for p, e in _factor(n):
                self.coefs[p] += scale * n * e

    def __add__(self, other):
        out = LogForm(self.coefs)
        for p, c in other.coefs.items():
            out.coefs[p] += c
        return out

    def __sub__(self, other):
        out = LogForm(self.coefs)
        for p, c in other.coefs.items():
            out.coefs[p] -= c
        return out

    def scaled(self, k: Fraction):
        return LogForm({p: c * k for p, c in self.coefs.items()})

    def key(self):
        return tuple(sorted((p, c) for p, c in self.coefs.items() if c != 0))

    def is_zero(self) -> bool:
        return not self.key()

    def value(self) -> float:
        return sum(float(c) * math.log2(p) for p, c in self.coefs.items())


def info_partition_form(col, members) -> LogForm:
    """MI(c vs rest; F) = (1/N)[N log N - sum n_f log n_f - n_c log n_c - n_r log n_r + sum inner]."""
    N = len(col)
    inside = Counter(col[i] for i in members)
    total = Counter(col)
    s = Fraction(1, N)
    f = LogForm()
    f.add_nlogn(N, s)
    for n in total.values():
        f.add_nlogn(n, -s)
    f.add_nlogn(len(members), -s)
    f.add_nlogn(N - len(members), -s)
    for v, n in total.items():
        f.add_nlogn(inside[v], s)
        f.add_nlogn(n - inside[v], s)
    return f


def info_category_form(col, members) -> LogForm:
    # P(c)(H - H_c) = (n_c/N)(log N - log n_c) - (n_c/N^2) sum n_f log n_f + (1/N) sum n_cf log n_cf
    N = len(col)
    n_c = len(members)
    f = LogForm()
    f.add_nlogn(N, Fraction(n_c, N * N))
    f.add_nlogn(n_c, Fraction(-1, N))
    for n in Counter(col).values():
        f.add_nlogn(n, Fraction(-n_c, N * N))
    for n in Counter(col[i] for i in members).values():
        f.add_nlogn(n, Fraction(1, N))
    return f


def rival(col, members):
    """Modal-rule cue validity, category validity, collocation for one column."""
    inside = Counter(col[i] for i in members)
    best = max(inside.values())
    f = min(v for v, n in inside.items() if n == best)
    p_c_f = Fraction(inside[f], col.count(f))
    p_f_c = Fraction(inside[f], len(members))
    return p_c_f, p_f_c, p_c_f * p_f_c


def column_profile(col, levels):
    """Per level: means over categories for one dimension."""
    out = []
    for level in levels:
        k = Fraction(1, len(level))
        part, cat = LogForm(), LogForm()
        rv = [Fraction(0)] * 3
        for members in level:
            part = part + info_partition_form(col, members).scaled(k)
            cat = cat + info_category_form(col, members).scaled(k)
            for i, v in enumerate(rival(col, members)):
                rv[i] += v * k
        out.append({"part": part, "cat": cat, "cue": rv[0], "catval": rv[1], "coll": rv[2]})
    return out


def combine(profiles):
    """Level means of a design; entropy terms add over dimensions, rivals average."""
    n = len(profiles)
    out = []
    for lvl in range(3):
        part, cat = LogForm(), LogForm()
        for pr in profiles:
            part = part + pr[lvl]["part"]
            cat = cat + pr[lvl]["cat"]
        row = {"part": part, "cat": cat}
        for key in ("cue", "catval", "coll"):
            row[key] = sum((pr[lvl][key] for pr in profiles), Fraction(0)) / n
        out.append(row)
    return out


MARGIN = 1e-6


def tools_ok(ev) -> bool:
    sup, bas, sub = ev
    cat = [e["cat"].value() for e in ev]
    part = [e["part"].value() for e in ev]
    return (
        cat[1] > cat[0] + MARGIN
        and cat[0] > cat[2] + MARGIN
        and (bas["part"] - sup["part"]).is_zero()
        and part[0] > part[2] + MARGIN
        and all(sup[k] > bas[k] and sup[k] > sub[k] for k in ("cue", "coll"))
        and sup["catval"] == bas["catval"] == sub["catval"]
    )


TARGET_LEVEL = {"top": 0, "middle": 1, "bottom": 2}


def family_ok(ev, target: str) -> bool:
    t = TARGET_LEVEL[target]
    part = [e["part"].value() for e in ev]
    return (
        all(part[t] > part[k] + MARGIN for k in range(3) if k != t)
        and all(ev[0][key] > ev[k][key] for key in ("cue", "coll") for k in (1, 2))
        and ev[0]["catval"] == ev[1]["catval"] == ev[2]["catval"]
    )


def _equality_key(profile, with_tie: bool):
    sup, bas, sub = profile
    tie = (bas["part"] - sup["part"]).key() if with_tie else ()
    return tie, (sup["catval"] - bas["catval"], bas["catval"] - sub["catval"])


def _key_vectors(keys):
    primes = sorted({p for tie, _ in keys for p, _ in tie})
    rows = []
    for tie, rats in keys:
        d = dict(tie)
        rows.append([d.get(p, Fraction(0)) for p in primes] + list(rats))
    den = 1
    for row in rows:
        for x in row:
            den = den * x.denominator // math.gcd(den, x.denominator)
    return np.array([[int(x * den) for x in row] for row in rows], dtype=np.int64)


def _pair_variation(col, tree) -> tuple[int, ...]:
    """Leaf pairs whose two items differ, counted per top-level subtree."""
    out, start = [], 0
    for sub in tree:
        size = _leaves(sub)
        out.append(sum(col[p] != col[p + 1] for p in range(start, start + size, 2)))
        start += size
    return tuple(out)


def _could_be_distinct(design, tree) -> bool:
    # items in one leaf pair can only differ if some column separates them
    need = [_leaves(sub) // 2 for sub in tree]
    have = [sum(v) for v in zip(*(_pair_variation(c, tree) for c in design))]
    return all(h >= n for h, n in zip(have, need))


def search(kind, target, tree, n_values, per_key=6, seed=0):
    """Yield (columns, evaluation) for designs meeting every constraint, in random key order."""
    rng = np.random.default_rng(seed)
    levels = levels_of(tree)
    # constant dimensions carry no information; leave them out
    cols = [c for c in canonical_columns(tree, n_values) if len(set(c)) > 1]
    profiles = [column_profile(c, levels) for c in cols]
    by_key = defaultdict(list)
    for i, pr in enumerate(profiles):
        by_key[_equality_key(pr, kind == "tools")].append(i)
    keys = list(by_key)
    vec = _key_vectors(keys)
    proj = rng.integers(1, 2**31, size=vec.shape[1], dtype=np.int64)
    h = vec @ proj
    n = len(keys)
    ii, jj = np.triu_indices(n)
    pair_h = h[ii] + h[jj]
    order = np.argsort(pair_h, kind="stable")
    sorted_h = pair_h[order]
    print(f"{len(cols)} columns, {n} equality keys, {len(pair_h)} key pairs", flush=True)
    check = tools_ok if kind == "tools" else (lambda ev: family_ok(ev, target))
    seen = set()
    for a in rng.permutation(len(pair_h)):
        lo = np.searchsorted(sorted_h, -pair_h[a], side="left")
        hi = np.searchsorted(sorted_h, -pair_h[a], side="right")
        for b in order[lo:hi]:
            if b < a or not np.array_equal(vec[ii[a]] + vec[jj[a]], -(vec[ii[b]] + vec[jj[b]])):
                continue
            choices = []
            for k in (ii[a], jj[a], ii[b], jj[b]):
                group = by_key[keys[k]]
                pick = rng.choice(len(group), size=min(per_key, len(group)), replace=False)
                choices.append([group[p] for p in pick])
            for idx in itertools.product(*choices):
                canon = tuple(sorted(idx))
                if canon in seen:
                    continue
                seen.add(canon)
                design = [cols[i] for i in canon]
                if not _could_be_distinct(design, tree):
                    continue
                ev = combine([profiles[i] for i in canon])
                if check(ev):
                    yield design, ev


def distinct_items(design) -> bool:
    return len(set(zip(*design))) == N_ITEMS


def _random_automorphism(tree, rng) -> list[int]:
    """Leaf permutation from shuffling isomorphic siblings at every node."""

    def walk(node, start):
        if node is None:
            return [start]
        spans = []
        for ch in node:
            spans.append(walk(ch, start))
            start += _leaves(ch)
        groups = defaultdict(list)
        for i, ch in enumerate(node):
            groups[_freeze(ch)].append(i)
        out = list(spans)
        for idx in groups.values():
            perm = list(idx)
            rng.shuffle(perm)
            for src, dst in zip(idx, perm):
                out[dst] = spans[src]
        return [x for span in out for x in span]

    return walk(tree, 0)


def _relabel(col) -> list[int]:
    order: dict[int, int] = {}
    for v in col:
        order.setdefault(v, len(order))
    return [order[v] for v in col]


def realize(design, tree, check, rng, tries=2000):
    """Permute each column within the tree's symmetries until items are distinct.

    Hill-climbs on the number of distinct items, re-drawing one column's
    permutation per step.  The result is re-verified exactly because the
    modal-value tie-break follows first-appearance order, which the
    permutation can change.
    """
    levels = levels_of(tree)

    def permuted(col):
        perm = _random_automorphism(tree, rng)
        return [col[perm[i]] for i in range(N_ITEMS)]

    for _ in range(max(1, tries // 500)):
        cols = [permuted(c) for c in design]
        score = len(set(zip(*cols)))
        for _ in range(500):
            if score == N_ITEMS:
                break
            j = rng.randrange(len(cols))
            trial = cols[:j] + [permuted(design[j])] + cols[j + 1 :]
            new = len(set(zip(*trial)))
            if new >= score:
                cols, score = trial, new
        if score == N_ITEMS:
            cols = [_relabel(c) for c in cols]
            ev = combine([column_profile(c, levels) for c in cols])
            if check(ev):
                return cols, ev
    return None, None


def to_fixture(design, tree, names, value_names):
    lines = [",".join(["id", *names])]
    for i in range(N_ITEMS):
        lines.append(",".join([f"t{i + 1:02d}", *(value_names[j][design[j][i]] for j in range(len(design)))]))
    level_names = ["superordinate", "intermediate", "subordinate"]
    h = {"levels": []}
    for k, level in enumerate(levels_of(tree)):
        h["levels"].append(
            {
                "name": level_names[k],
                "categories": [
                    {"name": f"{level_names[k][:3]}-{ci + 1}", "members": [f"t{i + 1:02d}" for i in members]}
                    for ci, members in enumerate(level)
                ],
            }
        )
    return "\n".join(lines) + "\n", json.dumps(h, indent=2) + "\n"


# -- factorial pattern designs ---------------------------------------------------

PATH_BITS = ("top", "middle", "pair", "item")


def pattern_columns():
    """Columns of the balanced tree that are functions of the leaf's path bits.

    A projection keeps a subset of the bits (values shared by whole subtrees,
    possibly across top-level categories); a parity keeps their XOR.
    """
    out = []
    for r in range(1, 5):
        for bits in itertools.combinations(range(4), r):
            def proj(leaf, bits=bits):
                return tuple((leaf >> (3 - b)) & 1 for b in bits)

            out.append((f"proj:{'+'.join(PATH_BITS[b] for b in bits)}", [proj(x) for x in range(N_ITEMS)]))
            if r > 1:
                def par(leaf, bits=bits):
                    return sum((leaf >> (3 - b)) & 1 for b in bits) % 2

                out.append((f"parity:{'+'.join(PATH_BITS[b] for b in bits)}", [par(x) for x in range(N_ITEMS)]))
    # every pair splits into a "dominant" item, whose value depends on the top
    # category at most, and a partner whose value follows a projection of the
    # upper bits; a parity of the upper bits picks which item is dominant
    upper = [b for r in range(4) for b in itertools.combinations(range(3), r)]
    for flip in upper:
        for shared in (True, False):
            for keep in upper:
                def dom(leaf, flip=flip, shared=shared, keep=keep):
                    side = (leaf & 1) ^ (sum((leaf >> (3 - b)) & 1 for b in flip) % 2)
                    if side == 0:
                        return ("d",) if shared else ("d", leaf >> 3)
                    return ("o", *((leaf >> (3 - b)) & 1 for b in keep))

                name = f"dom:flip={'+'.join(PATH_BITS[b] for b in flip) or '-'}," \
                    f"{'shared' if shared else 'by-top'},partner={'+'.join(PATH_BITS[b] for b in keep) or '-'}"
                out.append((name, [dom(x) for x in range(N_ITEMS)]))
    return [(name, _relabel(col)) for name, col in out]


def factorial_search(target: str, max_dims: int):
    """Smallest multisets of pattern columns meeting the family constraints, found by full enumeration."""
    levels = levels_of(BALANCED_TREE)
    # columns with the same level profile are interchangeable for the measures,
    # so search over profile classes and pick class members for distinctness
    classes = {}
    for name, col in pattern_columns():
        pr = column_profile(col, levels)
        key = tuple((round(lv["part"].value(), 9), lv["cue"], lv["catval"], lv["coll"]) for lv in pr)
        classes.setdefault(key, (pr, []))[1].append((name, col))
    profiles = [pr for pr, _ in classes.values()]
    members = [m for _, m in classes.values()]
    den = 1
    for pr in profiles:
        for lvl in pr:
            for key in ("cue", "catval", "coll"):
                den = den * lvl[key].denominator // math.gcd(den, lvl[key].denominator)
    ints = {key: np.array([[int(pr[l][key] * den) for l in range(3)] for pr in profiles]) for key in ("cue", "catval", "coll")}
    part = np.array([[pr[l]["part"].value() for l in range(3)] for pr in profiles])
    t = TARGET_LEVEL[target]
    others = [k for k in range(3) if k != t]
    for n_dims in range(1, max_dims + 1):
        combos = np.array(list(itertools.combinations_with_replacement(range(len(profiles)), n_dims)))
        cv = ints["catval"][combos].sum(axis=1)
        cu = ints["cue"][combos].sum(axis=1)
        co = ints["coll"][combos].sum(axis=1)
        pa = part[combos].sum(axis=1)
        ok = (cv[:, 0] == cv[:, 1]) & (cv[:, 1] == cv[:, 2])
        ok &= (cu[:, 0] > cu[:, 1]) & (cu[:, 0] > cu[:, 2]) & (co[:, 0] > co[:, 1]) & (co[:, 0] > co[:, 2])
        for k in others:
            ok &= pa[:, t] > pa[:, k] + MARGIN
        hits = []
        for row in combos[ok]:
            ev = combine([profiles[i] for i in row])
            if not family_ok(ev, target):
                continue
            for pick in itertools.product(*(members[i] for i in row)):
                design = [col for _, col in pick]
                if distinct_items(design):
                    hits.append(([name for name, _ in pick], design, ev))
                    break
        if hits:
            return hits
    return []


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("kind", choices=["tools", "family", "factorial"])
    ap.add_argument("--max-dims", type=int, default=6)
    ap.add_argument("--show", type=int, default=10)
    ap.add_argument("--target", choices=list(TARGET_LEVEL), default="top")
    ap.add_argument("--tree", choices=["tools", "balanced"], default=None)
    ap.add_argument("--values", type=int, default=3)
    ap.add_argument("--limit", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--tries", type=int, default=2000)
    ap.add_argument("--pick", type=int, default=0, help="index of the design to write")
    ap.add_argument("--out", default=None, help="prefix for .csv/.json output")
    args = ap.parse_args()

    tree_name = args.tree or ("tools" if args.kind == "tools" else "balanced")
    tree = TOOLS_TREE if tree_name == "tools" else BALANCED_TREE
    if args.kind == "factorial":
        hits = factorial_search(args.target, args.max_dims)
        print(f"{len(hits)} designs with {len(hits[0][1]) if hits else '-'} dimensions")
        for names, design, ev in hits[: args.show]:
            print("   ", names)
            for k, e in enumerate(ev):
                print(
                    "      level", k + 1,
                    f"part={e['part'].value():.6f} cue={float(e['cue']):.4f} catval={e['catval']} coll={float(e['coll']):.4f}",
                )
        if args.out and hits:
            names, design, _ = hits[args.pick]
            dims = [f"f{j + 1}" for j in range(len(design))]
            vals = [[f"{n}{v + 1}" for v in range(max(col) + 1)] for n, col in zip(dims, design)]
            csv_text, h_text = to_fixture(design, BALANCED_TREE, dims, vals)
            with open(args.out + ".csv", "w") as fh:
                fh.write(csv_text)
            with open(args.out + ".json", "w") as fh:
                fh.write(h_text)
            print(f"wrote {args.out}.csv and {args.out}.json from {names}")
        return
    check = tools_ok if args.kind == "tools" else (lambda ev: family_ok(ev, args.target))
    rng = random.Random(args.seed)
    pool, tried = [], 0
    for design, _ in search(args.kind, args.target, tree, args.values, seed=args.seed):
        tried += 1
        real, ev = realize(design, tree, check, rng, args.tries)
        if real is not None:
            pool.append((real, ev))
            if len(pool) >= args.limit:
                break
    print(f"{tried} designs tried")
    print(f"{len(pool)} realizable with distinct items")
    for n, (design, ev) in enumerate(pool[:8]):
        print(f"design {n}:")
        for col in design:
            print("   ", col)
        for k, e in enumerate(ev):
            print(
                "   level", k + 1,
                f"part={e['part'].value():.6f} cat={e['cat'].value():.6f}",
                f"cue={float(e['cue']):.4f} catval={e['catval']} coll={float(e['coll']):.4f}",
            )
    if args.out and pool:
        design, _ = pool[args.pick]
        names = ["size", "handle", "shaft", "head"]
        vals = [[f"{name}{v + 1}" for v in range(args.values)] for name in names]
        csv_text, h_text = to_fixture(design, tree, names, vals)
        with open(args.out + ".csv", "w") as fh:
            fh.write(csv_text)
        with open(args.out + ".json", "w") as fh:
            fh.write(h_text)
        print(f"wrote {args.out}.csv and {args.out}.json")


if __name__ == "__main__":
    main()
