"""Bundled reference solutions for the n=3, N=2 benchmark chains.

Nine states each for the periodic and the h-twisted chain at w = -0.5,
tau = i, homogeneous inhomogeneities, sector integers m1 = 1 and the rest
zero.  Each record carries the two roots of the four Q-functions, the two
phases, the two inhomogeneous coefficients, the energy and its level index.
Values are rounded to four decimals; feeding them into the residual system
reproduces each state up to that rounding, and refining them pins the
solutions to machine precision.
"""

from __future__ import annotations

from dataclasses import dataclass

__all__ = ["ReferenceRow", "TABLE1_ROWS", "TABLE2_ROWS", "BENCHMARK_PARAMS"]

BENCHMARK_PARAMS = {
    "n": 3,
    "tau": 1j,
    "w": -0.5,
    "N": 2,
    "thetas": (0.0, 0.0),
    "ms": (1, 0, 0, 0),
    "ls": (0, 0, 0, 0),
}


@dataclass(frozen=True)
class ReferenceRow:
    lam1: tuple[complex, complex]
    lam2: tuple[complex, complex]
    lam3: tuple[complex, complex]
    lam4: tuple[complex, complex]
    phi1: complex
    phi2: complex
    c1: complex
    c2: complex
    energy: complex
    level: int

    @property
    def roots(self) -> tuple[tuple[complex, ...], ...]:
        return (self.lam1, self.lam2, self.lam3, self.lam4)


TABLE1_ROWS: tuple[ReferenceRow, ...] = (
    ReferenceRow(
        (-1.5000 - 0.2862j, 1.5000 + 0.2862j),
        (-0.1667 + 0.1501j, 0.8333 - 0.1501j),
        (-0.3053 - 1.0000j, 1.3053 + 1.0000j),
        (0.3333 - 0.0000j, 1.0000 + 0.0000j),
        -0.7466 + 6.2832j,
        -5.1156 - 5.5878j,
        -0.0069 - 0.0057j,
        -138.0911 + 115.2344j,
        -5.619523,
        1,
    ),
    ReferenceRow(
        (-1.5000 + 0.2862j, 1.5000 - 0.2862j),
        (-0.1667 - 0.1501j, 0.8333 + 0.1501j),
        (-0.3053 + 1.0000j, 1.3053 - 1.0000j),
        (0.3333 + 0.0000j, 1.0000 - 0.0000j),
        -0.7466 - 6.2832j,
        -5.1156 + 5.5878j,
        -0.0069 + 0.0057j,
        -138.0911 - 115.2344j,
        -5.619523,
        1,
    ),
    ReferenceRow(
        (0.2550 + 0.0000j, -0.2550 - 0.0000j),
        (-0.1667 + 0.1501j, 0.8333 - 0.1501j),
        (0.7205 - 0.5000j, 0.2795 + 0.5000j),
        (1.3966 - 0.5000j, -0.0633 + 0.5000j),
        0.0054 + 3.1416j,
        0.0320 - 6.2239j,
        0.0243 - 0.1299j,
        -2.7217 + 0.8747j,
        -5.619523,
        1,
    ),
    ReferenceRow(
        (-0.2795 + 0.5000j, 0.2795 - 0.5000j),
        (0.5633 - 0.5000j, 0.1034 + 0.5000j),
        (0.2550 + 1.0000j, 0.7450 - 1.0000j),
        (0.6667 + 0.8499j, 0.6667 - 0.8499j),
        0.0374 - 0.3110j,
        -1.9185 - 5.9091j,
        -0.0053 - 0.0007j,
        -346.9166 + 5524.2128j,
        0.157726,
        2,
    ),
    ReferenceRow(
        (-0.2795 - 0.5000j, 0.2795 + 0.5000j),
        (0.5633 + 0.5000j, 0.1034 - 0.5000j),
        (0.2550 - 1.0000j, 0.7450 + 1.0000j),
        (0.6667 - 0.8499j, 0.6667 + 0.8499j),
        0.0374 + 0.3110j,
        -1.9185 + 5.9091j,
        -0.0053 + 0.0007j,
        -346.9166 - 5524.2128j,
        0.157726,
        2,
    ),
    ReferenceRow(
        (0.7601 - 0.5000j, -0.7601 + 0.5000j),
        (0.5633 - 0.5000j, 0.1034 + 0.5000j),
        (1.7517 - 0.0000j, -0.7517 + 0.0000j),
        (-0.6667 + 0.0000j, 2.0000 - 0.0000j),
        -0.0055 - 15.8970j,
        -0.0035 + 12.7554j,
        -2.8680 + 0.1801j,
        -0.0054 + 0.0427j,
        0.157726,
        2,
    ),
    ReferenceRow(
        (0.3053 - 0.0000j, -0.3053 + 0.0000j),
        (1.5000 - 0.0000j, -0.8333 + 0.0000j),
        (-0.5000 - 0.2862j, 1.5000 + 0.2862j),
        (1.6667 + 0.1501j, -0.3333 - 0.1501j),
        0.4211 - 3.1416j,
        -1.1676 + 3.1416j,
        -0.1592 + 0.0000j,
        3.1476 + 0.0000j,
        5.461797,
        3,
    ),
    ReferenceRow(
        (0.3053 - 0.0000j, -0.3053 + 0.0000j),
        (1.5000 + 0.0000j, -0.8333 - 0.0000j),
        (-0.5000 + 0.2862j, 1.5000 - 0.2862j),
        (1.6667 - 0.1501j, -0.3333 + 0.1501j),
        0.4211 + 3.1416j,
        -1.1676 - 3.1416j,
        -0.1592 + 0.0000j,
        3.1476 + 0.0000j,
        5.461797,
        3,
    ),
    ReferenceRow(
        (1.3053 - 1.0000j, -1.3053 + 1.0000j),
        (0.1667 + 0.0000j, 0.5000 - 0.0000j),
        (0.5000 - 0.2862j, 0.5000 + 0.2862j),
        (1.6667 + 0.1501j, -0.3333 - 0.1501j),
        -5.8621 - 0.6954j,
        5.1156 + 0.6954j,
        65.4540 + 54.6201j,
        3.1476 - 0.0000j,
        5.461797,
        3,
    ),
)

TABLE2_ROWS: tuple[ReferenceRow, ...] = (
    ReferenceRow(
        (-0.2987 + 0.0905j, 0.2987 - 0.0905j),
        (0.8147 + 0.0484j, -0.1481 + 0.6183j),
        (0.3220 + 0.1800j, 0.6780 - 0.1800j),
        (1.0000 + 0.0000j, 0.3333 + 1.3333j),
        1.4622 - 1.0718j,
        4.5236 - 3.7306j,
        3.4493 - 2.9903j,
        34.0526 + 77.9548j,
        -5.0705 - 0.1943j,
        1,
    ),
    ReferenceRow(
        (0.7013 + 0.0905j, -0.7013 - 0.0905j),
        (1.8147 + 0.0484j, -1.1481 + 0.6183j),
        (-0.3220 - 0.1800j, 1.3220 + 0.1800j),
        (1.0000 + 1.0000j, 0.3333 + 0.3333j),
        1.4622 + 9.4002j,
        2.4292 - 16.2969j,
        -4.3143 - 1.4921j,
        4.1934 + 9.5997j,
        -5.0705 - 0.1943j,
        1,
    ),
    ReferenceRow(
        (0.3498 + 0.1256j, -0.3498 - 0.1256j),
        (-0.1853 + 1.0484j, 0.8519 - 0.3817j),
        (0.3436 - 0.1110j, 0.6564 + 0.1110j),
        (0.0215 + 1.3974j, 1.3118 - 0.0641j),
        4.3225 + 9.5401j,
        2.5056 - 12.6652j,
        -102.6655 - 26.2513j,
        2.4711 - 8.2348j,
        -5.0705 - 0.1943j,
        1,
    ),
    ReferenceRow(
        (-0.3220 - 0.1800j, 0.3220 + 0.1800j),
        (0.1667 + 0.6667j, 0.5000 - 0.0000j),
        (-0.7013 - 0.0905j, 1.7013 + 0.0905j),
        (0.6853 + 0.9516j, 0.6481 + 0.3817j),
        1.7970 - 6.8967j,
        1.7596 + 3.7306j,
        3.1926 - 4.5605j,
        -6.1152 + 0.6177j,
        0.8364 + 1.3278j,
        2,
    ),
    ReferenceRow(
        (0.6780 - 0.1800j, -0.6780 + 0.1800j),
        (1.1667 - 0.3333j, -0.5000 + 1.0000j),
        (-0.7013 - 0.0905j, 1.7013 + 0.0905j),
        (0.6853 + 0.9516j, 0.6481 + 0.3817j),
        3.8914 + 18.2360j,
        -0.3348 - 10.9302j,
        25.9258 - 37.0339j,
        0.4424 + 0.6141j,
        0.8364 + 1.3278j,
        2,
    ),
    ReferenceRow(
        (0.6780 - 0.1800j, -0.6780 + 0.1800j),
        (1.1667 - 0.3333j, -0.5000 + 1.0000j),
        (-0.7013 - 0.0905j, 1.7013 + 0.0905j),
        (0.6853 + 0.9516j, 0.6481 + 0.3817j),
        3.8914 + 14.0472j,
        -0.3348 - 15.1190j,
        19.1094 + 40.9693j,
        -0.7531 + 0.0761j,
        0.8364 + 1.3278j,
        2,
    ),
    ReferenceRow(
        (1.2648 + 0.0940j, -1.2648 - 0.0940j),
        (-0.5215 - 0.3974j, 1.1882 + 1.0641j),
        (1.7274 + 0.1920j, -0.7274 - 0.1920j),
        (-1.0000 + 1.0000j, 2.3333 + 0.3333j),
        4.2878 + 4.8973j,
        -0.6765 + 4.5508j,
        24.2590 - 49.1261j,
        -0.6505 - 0.0544j,
        4.2341 - 1.1336j,
        3,
    ),
    ReferenceRow(
        (-0.3436 + 0.1110j, 0.3436 - 0.1110j),
        (-1.8118 + 0.0641j, 2.4785 + 0.6026j),
        (1.3498 + 0.1256j, -0.3498 - 0.1256j),
        (1.6481 + 0.3817j, -0.3147 + 0.9516j),
        1.8336 - 2.8543j,
        1.8807 - 8.7834j,
        -4.3389 - 0.6734j,
        -8.8842 + 2.4665j,
        4.2341 - 1.1336j,
        3,
    ),
    ReferenceRow(
        (2.6564 + 0.1110j, -2.6564 - 0.1110j),
        (-0.8118 + 0.0641j, 1.4785 + 0.6026j),
        (-0.3498 - 0.1256j, 1.3498 + 0.1256j),
        (2.6481 + 0.3817j, -1.3147 + 0.9516j),
        1.8336 + 18.0896j,
        1.8807 - 19.2553j,
        2.7526 - 3.4208j,
        2.3061 - 8.9272j,
        4.2341 - 1.1336j,
        3,
    ),
)
