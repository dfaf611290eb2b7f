"""Layer dimensions and bracket bases of free nilpotent Lie algebras.

Prints the dimension of each graded layer for a few (width, depth) choices,
shows the bracket words spanning the layers, and verifies the closed
dimension formula against direct enumeration.
"""

import numpy as np

from nilfourier import GroupSpec, build_layered_basis, lyndon_words, witt_dimension

print("Layer dimensions m_k for the free nilpotent algebra on d generators")
print()
header = "  d \\ k |" + "".join(f"{k:>6}" for k in range(1, 7)) + "   total (N=6)"
print(header)
print("  " + "-" * (len(header) - 2))
for d in range(1, 5):
    dims = [witt_dimension(d, k) for k in range(1, 7)]
    print(f"  {d:>5} |" + "".join(f"{m:>6}" for m in dims) + f"   {sum(dims):>6}")

print()
print("Each layer is spanned by bracketings of Lyndon words.")
for d, N in [(2, 3), (3, 2)]:
    basis = build_layered_basis(GroupSpec(d, N))
    words_by_length = lyndon_words(d, N)
    print(f"\n  d={d}, N={N}  (group dimension {basis.dim}):")
    for k, layer in enumerate(basis.layers, start=1):
        words = ["".join(map(str, w)) for w in words_by_length[k]]
        brackets = [str(t) for t in layer.elements]
        print(f"    layer {k}: words {words}")
        print(f"             brackets {brackets}")

print()
print("Flat coordinates list the top layer first; a layer-2 direction on")
print("the d=2, N=2 group sits at flat index 0:")
basis = build_layered_basis(GroupSpec(2, 2))
flat = np.zeros(basis.dim)
flat[basis.flat_index(2, 1)] = 1.5
print(f"  coefficient 1.5 on {basis.layers[1].elements[0]} -> flat {flat.tolist()}")
element = basis.algebra_element(flat)
print(f"  degree-2 tensor part of that element: {element.levels[2].tolist()}")
