#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
# Copyright 2026 ICH Forge Contributors
"""Brute-force reference scores for the metric fixtures.

Every n-gram table is materialized as a plain list and matched by repeated
list removal, so nothing here shares structure with the C++ counting code.
Usage: metric_oracle.py CAND REF [char|whitespace]
"""
import json
import math
import sys

EPS = 1e-9


def tokens(text, mode):
    if mode == "char":
        return [c for c in text if not c.isspace()]
    return text.split()


def grams(seq, n):
    return [tuple(seq[i:i + n]) for i in range(len(seq) - n + 1)]


def clipped_matches(cand, ref):
    pool = list(ref)
    hits = 0
    for g in cand:
        if g in pool:
            pool.remove(g)
            hits += 1
    return hits


def rouge_n(c, r, n):
    cg, rg = grams(c, n), grams(r, n)
    if not cg and not rg and c and r:
        return rouge_n(c, r, min(len(c), len(r)))
    if not cg or not rg:
        return 0.0
    m = clipped_matches(cg, rg)
    if m == 0:
        return 0.0
    p, rc = m / len(cg), m / len(rg)
    return 2 * p * rc / (p + rc)


def lcs(a, b):
    if not a or not b:
        return 0
    if a[0] == b[0]:
        return 1 + lcs(a[1:], b[1:])
    return max(lcs(a[1:], b), lcs(a, b[1:]))


def rouge_l(c, r):
    if not c or not r:
        return 0.0
    l = lcs(c, r)
    if l == 0:
        return 0.0
    p, rc = l / len(c), l / len(r)
    return 2 * p * rc / (p + rc)


def bleu(c, r, n):
    if not c:
        return 0.0
    logs = []
    for k in range(1, n + 1):
        cg = grams(c, k)
        if not cg:
            continue
        m = clipped_matches(cg, grams(r, k))
        num, den = float(m), float(len(cg))
        if m == 0:
            num, den = num + EPS, den + EPS
        logs.append(math.log(num / den))
    bp = 1.0 if len(c) >= len(r) else math.exp(1 - len(r) / len(c))
    return bp * math.exp(sum(logs) / len(logs))


def chrf(cand, ref, beta=2.0):
    c = [ch for ch in cand if not ch.isspace()]
    r = [ch for ch in ref if not ch.isspace()]
    if not c or not r:
        return 0.0
    fs = []
    for n in range(1, 7):
        cg, rg = grams(c, n), grams(r, n)
        if not cg and not rg:
            continue
        m = clipped_matches(cg, rg)
        p = m / len(cg) if cg else 0.0
        rc = m / len(rg) if rg else 0.0
        b2 = beta * beta
        fs.append((1 + b2) * p * rc / (b2 * p + rc) if p + rc > 0 else 0.0)
    return sum(fs) / len(fs)


def scores(cand, ref, mode="char"):
    c, r = tokens(cand, mode), tokens(ref, mode)
    return {
        "rouge1_f": rouge_n(c, r, 1),
        "rouge2_f": rouge_n(c, r, 2),
        "rougeL_f": rouge_l(c, r),
        "bleu1": bleu(c, r, 1),
        "bleu2": bleu(c, r, 2),
        "bleu3": bleu(c, r, 3),
        "bleu4": bleu(c, r, 4),
        "chrf": chrf(cand, ref),
    }


if __name__ == "__main__":
    mode = sys.argv[3] if len(sys.argv) > 3 else "char"
    print(json.dumps(scores(sys.argv[1], sys.argv[2], mode), indent=1))
