"""Reference computations used as test oracles.

These work on plain Python data (lists, sets, ints) and avoid the package's
own helpers, so they can catch mistakes in the implementation they check.
"""

from __future__ import annotations

import ipaddress
import re
from itertools import permutations


def running_unions(start: set, items: list) -> list:
    """A_i = start | {items[0..i]}, recomputed from scratch for every i."""
    out = []
    for i in range(len(items)):
        acc = set(start)
        for j in range(i + 1):
            acc.add(items[j])
        out.append(frozenset(acc))
    return out


def filter_by_index_set(items: list, pred) -> list:
    keep = {i for i in range(len(items)) if pred(items[i])}
    return [items[i] for i in sorted(keep)]


def is_subsequence(sub: list, seq: list) -> bool:
    it = iter(seq)
    return all(any(x == y for y in it) for x in sub)


def shared_length(a: list, b: list):
    """The common n both premises require, or None when no n works."""
    for n in range(max(len(a), len(b)) + 1):
        if len(a) == n and len(b) == n:
            return n
    return None


def natural_key(name: str):
    return tuple(int(p) if p.isdigit() else p for p in re.split(r"(\d+)", name))


def merge_tables(sigma: dict, pairs: list) -> dict:
    """Fold over the deduplicated (switch name, rule) pairs, grouped by switch name."""
    unique = []
    for p in pairs:
        if p not in unique:
            unique.append(p)
    out = {k: list(v) for k, v in sigma.items()}
    for name in sorted({sw for sw, _ in unique}, key=natural_key):
        for sw, rule in unique:
            if sw == name:
                out.setdefault(name, []).append(rule)
    return out


def firewall_tables(switches: list, prohibited: list) -> dict:
    """Expected tables for the firewall program: each IP's drop rule lands on switch ip mod n."""
    out = {}
    for ip in prohibited:
        target = switches[int(ipaddress.IPv4Address(ip)) % len(switches)]
        out.setdefault(target, []).append(("srcip", ip, "drop"))
    return out


def first_match(rules: list, packet: dict):
    """Index of the first rule whose (field, value) predicate holds, by exhaustive scan."""
    hits = [i for i, (field, value) in enumerate(rules) if field is None or packet[field] == value]
    return min(hits) if hits else None


def all_orderings(xs):
    return list(permutations(xs))
