"""Galois coverings, fibres and reconstruction for S3 acting on three points.

Run: python3 demos/galois_tour.py
"""
from topospi1.galois import fibre, galois_covering, is_galois, reconstruct_fibre
from topospi1.grp import subgroups, symmetric_group
from topospi1.homs import find_isomorphism
from topospi1.pi1 import bg_roundtrip
from topospi1.site import coset_presheaf, groupoid_site

G = symmetric_group(3)
C = groupoid_site(G)
K = next(K for K in subgroups(G) if K.order == 2)
X = coset_presheaf(C, G, K)  # S3 acting on the three cosets of a transposition

cert = is_galois(X)
print(f"three points: Galois={cert.verdict}, |Aut|={cert.aut.group.order}")

cov = galois_covering(X)
print(f"Galois covering: {cov.covering.size(0)} points, group of order {cov.group.order}")

fr = fibre(X)
print(f"fibre: {fr.size} points, transitive={fr.is_transitive()}, acted on by a group of order {fr.aut.group.order}")

rec = reconstruct_fibre(X, fr)
print("rebuilt from fibre:", find_isomorphism(rec.obj, X) is not None)

r = bg_roundtrip(G)
print(f"fundamental group of BS3 has order {r.fundamental.group.order}; "
      f"comparison map is an isomorphism: {r.psi.is_isomorphism()}")
