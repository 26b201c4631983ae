"""Graph arithmetic walkthrough: volumes, cuts, conductance, induced clusters.

The package measures everything through three quantities: the volume of a
vertex set (sum of degrees, self-loops counted once), the weight of the
edges leaving it, and their ratio against the smaller side -- the
conductance.  Run this script to see them on graphs small enough to check
by hand.
"""

from powercut import Graph, barbell_graph, min_conductance_bruteforce

K4 = Graph(4, [(i, j) for i in range(4) for j in range(i + 1, 4)])
print("K4: degrees", K4.deg, "volume", K4.total_volume)
print("  cut({0}):", K4.cut_weight([0]), " conductance:", K4.conductance([0]))
print("  balance({0}):", K4.balance([0]))

phi, witness = min_conductance_bruteforce(K4)
print("  exhaustive minimum conductance:", phi, "witness", witness)
print("  -> K4 is a phi-expander for any phi <=", phi)

print()
C8 = Graph(8, [(i, (i + 1) % 8) for i in range(8)])
S = [0, 1, 2, 3]
print("C8, four contiguous vertices:")
print("  cut weight", C8.cut_weight(S), " conductance", C8.conductance(S),
      " balance", C8.balance(S))

print()
print("induced cluster with degree-preserving self-loops:")
path = Graph(3, [(0, 1), (1, 2)])
sub = path.induce_with_loops([0, 1])
print("  path a-b-c restricted to {a, b}:", sub.edge_list())
print("  degrees preserved:", sub.deg, "(b keeps its degree via a loop)")

print()
bb = barbell_graph(2, 4, 1)
print("barbell(2 x K4 + bridge): volume", bb.total_volume)
phi, witness = min_conductance_bruteforce(bb)
print("  minimum conductance", round(phi, 4), "at", witness,
      "-- the bridge cut, as expected")
