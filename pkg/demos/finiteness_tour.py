"""Decidable, locally finite and Kuratowski-finite presheaves on small sites.

Run: python3 demos/finiteness_tour.py
"""
from topospi1.finiteness import analyze, connected_components, splitting_object
from topospi1.site import Presheaf, arrow_site, circle_site, constant, terminal


def show(label, X):
    rep = analyze(X)
    print(f"{label:38s} components={rep.component_count} decidable={rep.decidable} "
          f"locally_finite={rep.locally_finite} kuratowski={rep.kuratowski_finite} finite={rep.finite}")


C = circle_site()
swap = Presheaf(C, [["0", "1"], ["0", "1"]], [None, None, [0, 1], [1, 0]])
show("two points, constant on the circle", constant(C, "pq"))
show("two points twisted by b", swap)

A = arrow_site()
# y has two elements glued onto one element of x: not decidable
glued = Presheaf(A, [["a"], ["u", "v"]], [None, None, [0, 0]])
show("two elements glued along the arrow", glued)
# injective but not bijective: decidable, yet neither locally finite nor Kuratowski-finite
inj = Presheaf(A, [["a", "b"], ["u"]], [None, None, [0]])
show("one element over two along the arrow", inj)

# the twisted object is connected but splits after pulling back along a cover of 1
sp = splitting_object(swap)
print(f"\nsplitting object for the twisted pair: fibre n={sp.n}, cover total size {sp.U.total_size}")
print("components of the twisted pair:", len(connected_components(swap)))
print("terminal on the circle is connected:", len(connected_components(terminal(C))) == 1)
