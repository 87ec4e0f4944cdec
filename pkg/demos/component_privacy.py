"""What a separating coalition learns, component by component.

Ten agents sit on a ring with one chord. The coalition {3, 5, 10} is a
vertex cut: removing it strands {1,2}, {4}, and {6,7,8,9}. The coalition
then learns each stranded component's subtotal, but nothing more: within a
component it cannot tell who contributed what. The lonely component {4} has
nowhere to hide, since its subtotal is its value.
"""
from privavg import (
    AdversarySpec,
    Topology,
    check_group_privacy,
    connected_components,
    is_vertex_cut,
)

ring = [(i, i + 1) for i in range(1, 10)] + [(1, 10)]
t = Topology(10, ring + [(6, 9)])
coalition = frozenset({3, 5, 10})
adv = AdversarySpec(members=coalition)

print(f"coalition {sorted(coalition)} is a vertex cut: {is_vertex_cut(t, coalition)}")
survivors = set(t.vertices) - coalition
comps = connected_components(t, survivors)
print("surviving components:",
      " ".join("{" + ",".join(map(str, sorted(c))) + "}" for c in comps))

p = 11
print(f"\ngroup privacy audits at p={p} (sampled chi-square where enumeration"
      " is out of reach):")

pair_front = ([2, 3] + [0] * 8, [4, 1] + [0] * 8)
v = check_group_privacy(t, p, adv, {1, 2}, *pair_front,
                        budget=10**6, samples=20_000, alpha=0.01, seed=5)
print(f"  {{1,2}}: swap 2,3 for 4,1 (same subtotal) -> indistinguishable: {v.passed}")

s = [0] * 5 + [1, 2, 3, 4, 0]
s_prime = [0] * 5 + [4, 3, 2, 1, 0]
v = check_group_privacy(t, p, adv, {6, 7, 8, 9}, s, s_prime,
                        budget=10**6, samples=20_000, alpha=0.01, seed=5)
print(f"  {{6,7,8,9}}: reverse the four inputs -> indistinguishable: {v.passed}")

v = check_group_privacy(t, p, adv, {4}, [0] * 10, [0] * 10)
print(f"  {{4}}: protected: {v.passed} ({v.details['reason']})")
