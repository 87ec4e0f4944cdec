"""Show exactly which mask vectors the share exchange can produce.

The masks are never arbitrary: on a connected graph they land uniformly on
the hyperplane of vectors summing to zero mod p. We enumerate every possible
edge-difference assignment on a triangle at p = 3 and print the full
histogram, then break the graph in two to show the support collapsing to the
product of per-component hyperplanes.
"""
from privavg import (
    Topology,
    check_mask_uniformity,
    connected_components,
    enumerate_mask_distribution,
    incidence_rank_mod_p,
)

p = 3
triangle = Topology(3, [(1, 2), (2, 3), (1, 3)])
hist = enumerate_mask_distribution(triangle, p)

print(f"triangle, p={p}: {hist.total} difference assignments "
      f"-> {len(hist.counts)} distinct mask vectors")
for masks in sorted(hist.counts):
    print(f"  a = {masks}  count {hist.counts[masks]}  (sum {sum(masks) % p} mod {p})")

verdict = check_mask_uniformity(triangle, p)
print(f"\nuniform on the zero-sum hyperplane: {verdict.passed}")
print(f"  support {verdict.details['support_size']} = p^(n-1) = {p ** 2}")

# two isolated edges: each side keeps its own zero-sum constraint
split = Topology(4, [(1, 2), (3, 4)])
split_hist = enumerate_mask_distribution(split, p)
comps = connected_components(split)
rank = incidence_rank_mod_p(split, p)
print(f"\ntwo isolated edges, p={p}: support {len(split_hist.counts)} "
      f"= p^(n-c) = {p ** (split.n - len(comps))} (incidence rank {rank})")
print(f"uniformity verdict on the split graph: {check_mask_uniformity(split, p).passed}"
      " (masks can no longer cross the gap)")
