#!/usr/bin/env python3
"""Brute-force reference for the F1 fixture (2 members, 2 reference rows, m=4,
delta=0.1). Every value is recomputed from first principles: direct formula
evaluation plus exhaustive subset search. Output is `name value` per line;
flip sets print as bitmasks (bit j = SNV j, 0-indexed)."""
import itertools
import math

delta, n, m = 0.1, 2, 4
f = [0.1, 0.2, 0.3, 0.25]
d = [[1, 0, 1, 0], [1, 1, 0, 0]]            # beacon rows
ref = [[1, 1, 0, 0], [0, 0, 1, 0]]          # reference rows
x = [1, 1, 1, 0]
dn = [(1 - fj) ** (2 * n) for fj in f]
dn1 = [(1 - fj) ** (2 * (n - 1)) for fj in f]
A = [math.log((1 - dn[j]) / (1 - delta * dn1[j])) for j in range(m)]
B = [math.log(dn[j] / (delta * dn1[j])) for j in range(m)]
gain = [B[j] - A[j] for j in range(m)]
q1 = [j for j in range(m) if x[j]]
out = []
emit = lambda k, v: out.append((k, v))

def lrt(row, xs):
    return sum(row[j] * (A[j] if xs[j] else B[j]) for j in range(m) if row[j])

def flipped(F):
    return [0 if (j in F and x[j]) else x[j] for j in range(m)]

for j in range(m):
    emit(f"a{j+1}", A[j]); emit(f"b{j+1}", B[j])
emit("eta1", lrt(d[0], x)); emit("eta2", lrt(d[1], x))
emit("score_b2", lrt(ref[1], x))
emit("flip1_member1", lrt(d[0], flipped({0})))
emit("flip1_member2", lrt(d[1], flipped({0})))
ref_scores = [lrt(r, x) for r in ref]
emit("theta_k1", min(ref_scores)); emit("theta_k2", sum(ref_scores) / 2)
emit("thm_dn", min(math.log(dn[j] / (1 - dn[j])) for j in q1))
thm_eta = min(sum(r[j] * math.log(1 - dn[j]) for j in q1) for r in d)
emit("thm_eta", thm_eta)
emit("thm_bound", 1 / (1 + math.exp(0 - thm_eta - min(math.log(dn[j] / (1 - dn[j])) for j in q1))))
emit("b1_tiny_delta", math.log(dn[0] / dn1[0]) - math.log(1e-240))
dk2 = [sum(r[j] * gain[j] for r in ref) / 2 for j in range(m)]
for j in range(m):
    emit(f"delta_k2_{j+1}", dk2[j])
    emit(f"delta_1k_{j+1}", d[0][j] * gain[j] - dk2[j])
    emit(f"delta_2k_{j+1}", d[1][j] * gain[j] - dk2[j])
dk1 = [ref[0][j] * gain[j] for j in range(m)]   # bottom-1 is b1
elig = lambda dk: sum(1 << j for j in q1
                      if all(d[i][j] * gain[j] - dk[j] >= 0 for i in range(2)))
emit("eligible_k1_mask", elig(dk1)); emit("eligible_k2_mask", elig(dk2))

def exact(ok, candidates):
    for size in range(len(candidates) + 1):
        for c in itertools.combinations(candidates, size):
            if ok(set(c)):
                return sum(1 << j for j in c)
    return -1

emit("exact_theta0_mask", exact(lambda F: all(lrt(r, flipped(F)) >= 0 for r in d), q1))
emit("exact_thetam2_mask", exact(lambda F: all(lrt(r, flipped(F)) >= -2 for r in d), q1))
eta = [lrt(r, x) for r in d]
ad_ok = lambda F: all(sum(d[i][j] * gain[j] - dk2[j] for j in F) + eta[i] >= sum(ref_scores) / 2 for i in range(2))
emit("exact_adapt_k2_mask", exact(ad_ok, [j for j in q1 if (elig(dk2) >> j) & 1]))
hist, flips = [], set()
for q in [2, 0, 1]:                              # fixed online greedy, theta=0
    hist.append(q)
    score = lambda r: sum(r[j] * (A[j] if (x[j] and j not in flips) else B[j]) for j in hist if r[j])
    if x[q] and any(score(r) < 0 for r in d):
        flips.add(q)
    emit(f"online_resp_{len(hist)}", 0 if q in flips else x[q])
emit("online_flips", len(flips))
hist, flips = [], set()
for q in [0, 1, 2]:                              # adaptive online greedy, K=2
    hist.append(q)
    served = lambda r: sum(r[j] * (B[j] if (j in flips or not x[j]) else A[j]) for j in hist if r[j])
    theta_t = sum(sorted(served(r) for r in ref)[:2]) / 2
    if x[q] and any(served(r) < theta_t for r in d):
        flips.add(q)
    emit(f"aonline_resp_{len(hist)}", 0 if q in flips else x[q])
emit("aonline_flips", len(flips))
P = [[j for j in q1 if r[j]] for r in d]
wc = lambda i, F, th: sum(A[j] for j in P[i] if j not in F) - th
emit("wc_m1_f0_th11", wc(0, set(), -1.1)); emit("wc_m1_f1_th11", wc(0, {0}, -1.1))
pool = sorted(set(P[0]) | set(P[1]))
emit("unauth_exact_th11_mask", exact(lambda F: all(wc(i, F, -1.1) >= 0 for i in range(2)), pool))
emit("unauth_exact_th0_mask", exact(lambda F: all(wc(i, F, 0.0) >= 0 for i in range(2)), pool))
emit("unauth_exact_thm100_mask", exact(lambda F: all(wc(i, F, -100.0) >= 0 for i in range(2)), pool))
dbar = [sum(r[j] for r in ref) / 2 for j in range(m)]
W = lambda i, F: sum(min((d[i][j] * gain[j] - dk2[j] if j in F else 0) + (d[i][j] - dbar[j]) * A[j], 0) for j in q1)
for i in range(2):
    emit(f"k{i+1}_const", -sum(min((d[i][j] - dbar[j]) * B[j], 0) for j in range(m) if not x[j]))
emit("w1_y0", W(0, set())); emit("w1_after1", W(0, {0})); emit("w2_after1", W(1, {0}))
emit("unauth_adapt_feasible", 1 if all(W(i, {0}) >= max(0, 0) for i in range(2)) else 0)
xf = flipped({0})
emit("adapt_theta_postflip1", sum(sorted(lrt(r, xf) for r in ref)[:2]) / 2)
emit("rf23_member1", lrt(d[0], flipped({1, 2}))); emit("rf23_member2", lrt(d[1], flipped({1, 2})))
emit("dbar_n_1_3_2", math.exp(math.lgamma(4) + math.lgamma(7) - math.lgamma(3) - math.lgamma(8)))
for key, value in out:
    print(key, "%.17g" % value)
