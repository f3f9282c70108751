"""Walk through the tensor algebra conventions used across the package.

Everything downstream (pre-averaging, projection, baselines) leans on one
storage convention: within a snapshot the first index varies fastest, and
mode-k unfolding puts mode k on the rows with the remaining indices ordered
the same way.  This script builds tiny tensors where every number can be
checked by hand and verifies the algebra identities numerically.
"""

import numpy as np

from tenfact import fold, kron_chain_skipping, mode_product, unfold


def main():
    rng = np.random.default_rng(0)

    # A 2x3 matrix stored first-index-fastest reads down the columns.
    m = np.array([[1.0, 3.0, 5.0], [2.0, 4.0, 6.0]])
    print("2x3 matrix:")
    print(m)
    print("first-index-fastest order:", m.ravel(order="F"))

    # Unfold / fold are exact inverses for any mode.
    x = rng.standard_normal((4, 3, 2))
    for mode in range(x.ndim):
        mat = unfold(x, mode)
        back = fold(mat, x.shape, mode)
        print(f"mode {mode}: unfolding is {mat.shape}, round trip exact:",
              np.array_equal(back, x))

    # Multiplying along mode k is plain matrix multiplication on the
    # mode-k unfolding.
    a = rng.standard_normal((5, 3))
    y = mode_product(x, a, 1)
    gap = np.abs(unfold(y, 1) - a @ unfold(x, 1)).max()
    print(f"mode product vs unfolded matmul, max gap {gap:.3e}")

    # Applying a matrix to every mode acts on one unfolding as the mode's
    # own matrix from the left and the Kronecker chain of the others from
    # the right (highest mode leftmost in the chain).
    mats = [rng.standard_normal((d + 1, d)) for d in x.shape]
    z = x
    for k, mk in enumerate(mats):
        z = mode_product(z, mk, k)
    for mode in range(x.ndim):
        chain = kron_chain_skipping(mats, mode)
        gap = np.abs(unfold(z, mode) - mats[mode] @ unfold(x, mode) @ chain.T).max()
        print(f"mode {mode}: Kronecker identity, max gap {gap:.3e}")


if __name__ == "__main__":
    main()
