"""Regenerate the bundled glyph atlas (src/anpr/dataset/atlas/*.pbm).

Characters are drawn on a 7 x 12 grid and doubled to 14 x 24 with
2-pixel strokes, then cropped tight. The two special symbols are drawn
at native resolution.
"""

import pathlib
import sys

import numpy as np

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from anpr.image import BinaryImage, write_netpbm  # noqa: E402

OUT = pathlib.Path(__file__).resolve().parents[1] / "src" / "anpr" / "dataset" / "atlas"

GLYPHS = {
    "0": """
.#####.
#.....#
#....##
#...#.#
#...#.#
#..#..#
#..#..#
#.#...#
#.#...#
##....#
#.....#
.#####.""",
    "1": """
...#...
..##...
.#.#...
#..#...
...#...
...#...
...#...
...#...
...#...
...#...
...#...
#######""",
    "2": """
.#####.
#.....#
......#
......#
.....#.
....#..
...#...
..#....
.#.....
#......
#......
#######""",
    "3": """
.#####.
#.....#
......#
......#
......#
..####.
......#
......#
......#
......#
#.....#
.#####.""",
    "4": """
.....#.
....##.
...#.#.
..#..#.
.#...#.
#....#.
#######
.....#.
.....#.
.....#.
.....#.
.....#.""",
    "5": """
#######
#......
#......
#......
######.
......#
......#
......#
......#
......#
#.....#
.#####.""",
    "6": """
..####.
.#.....
#......
#......
#.####.
##....#
#.....#
#.....#
#.....#
#.....#
#.....#
.#####.""",
    "7": """
#######
......#
......#
.....#.
.....#.
....#..
....#..
...#...
...#...
..#....
..#....
..#....""",
    "8": """
.#####.
#.....#
#.....#
#.....#
#.....#
.#####.
#.....#
#.....#
#.....#
#.....#
#.....#
.#####.""",
    "9": """
.#####.
#.....#
#.....#
#.....#
#.....#
#....##
.####.#
......#
......#
......#
.....#.
.####..""",
    "A": """
...#...
..#.#..
..#.#..
.#...#.
.#...#.
.#...#.
#.....#
#######
#.....#
#.....#
#.....#
#.....#""",
    "B": """
######.
#.....#
#.....#
#.....#
#.....#
######.
#.....#
#.....#
#.....#
#.....#
#.....#
######.""",
    "C": """
.#####.
#.....#
#......
#......
#......
#......
#......
#......
#......
#......
#.....#
.#####.""",
    "D": """
#####..
#....#.
#.....#
#.....#
#.....#
#.....#
#.....#
#.....#
#.....#
#.....#
#....#.
#####..""",
    "E": """
#######
#......
#......
#......
#......
#####..
#......
#......
#......
#......
#......
#######""",
    "F": """
#######
#......
#......
#......
#......
#####..
#......
#......
#......
#......
#......
#......""",
    "G": """
.#####.
#.....#
#......
#......
#......
#..####
#.....#
#.....#
#.....#
#.....#
#.....#
.#####.""",
    "H": """
#.....#
#.....#
#.....#
#.....#
#.....#
#######
#.....#
#.....#
#.....#
#.....#
#.....#
#.....#""",
    "I": """
###
.#.
.#.
.#.
.#.
.#.
.#.
.#.
.#.
.#.
.#.
###""",
    "J": """
....###
.....#.
.....#.
.....#.
.....#.
.....#.
.....#.
.....#.
.....#.
#....#.
#....#.
.####..""",
    "K": """
#.....#
#....#.
#...#..
#..#...
#.#....
##.....
##.....
#.#....
#..#...
#...#..
#....#.
#.....#""",
    "L": """
#......
#......
#......
#......
#......
#......
#......
#......
#......
#......
#......
#######""",
    "M": """
#.....#
##...##
#.#.#.#
#..#..#
#..#..#
#.....#
#.....#
#.....#
#.....#
#.....#
#.....#
#.....#""",
    "N": """
#.....#
##....#
##....#
#.#...#
#.#...#
#..#..#
#..#..#
#...#.#
#...#.#
#....##
#....##
#.....#""",
    "O": """
.#####.
#.....#
#.....#
#.....#
#.....#
#.....#
#.....#
#.....#
#.....#
#.....#
#.....#
.#####.""",
    "P": """
######.
#.....#
#.....#
#.....#
#.....#
######.
#......
#......
#......
#......
#......
#......""",
    "Q": """
.#####.
#.....#
#.....#
#.....#
#.....#
#.....#
#.....#
#.....#
#..#..#
#...#.#
#....#.
.####.#""",
    "R": """
######.
#.....#
#.....#
#.....#
#.....#
######.
#.#....
#..#...
#...#..
#....#.
#.....#
#.....#""",
    "S": """
.#####.
#.....#
#......
#......
#......
.#####.
......#
......#
......#
......#
#.....#
.#####.""",
    "T": """
#######
...#...
...#...
...#...
...#...
...#...
...#...
...#...
...#...
...#...
...#...
...#...""",
    "U": """
#.....#
#.....#
#.....#
#.....#
#.....#
#.....#
#.....#
#.....#
#.....#
#.....#
#.....#
.#####.""",
    "V": """
#.....#
#.....#
#.....#
#.....#
.#...#.
.#...#.
.#...#.
.#...#.
..#.#..
..#.#..
..#.#..
...#...""",
    "W": """
#.....#
#.....#
#.....#
#.....#
#.....#
#.....#
#..#..#
#..#..#
#.#.#.#
#.#.#.#
##...##
#.....#""",
    "X": """
#.....#
#.....#
.#...#.
.#...#.
..#.#..
...#...
...#...
..#.#..
.#...#.
.#...#.
#.....#
#.....#""",
    "Y": """
#.....#
#.....#
.#...#.
.#...#.
..#.#..
...#...
...#...
...#...
...#...
...#...
...#...
...#...""",
    "Z": """
#######
......#
.....#.
.....#.
....#..
...#...
...#...
..#....
.#.....
.#.....
#......
#######""",
}


def parse(art: str) -> np.ndarray:
    rows = [r for r in art.strip("\n").split("\n")]
    return np.array([[c == "#" for c in r] for r in rows], dtype=np.uint8)


def tight(bits: np.ndarray) -> np.ndarray:
    ys = np.flatnonzero(bits.any(axis=1))
    xs = np.flatnonzero(bits.any(axis=0))
    return bits[ys[0] : ys[-1] + 1, xs[0] : xs[-1] + 1]


def special_a() -> np.ndarray:
    """Sparse blot: single-pixel specks on a rising diagonal."""
    bits = np.zeros((25, 13), dtype=np.uint8)
    for i in range(5):
        bits[24 - 6 * i, 3 * i] = 1
    return bits


def special_b() -> np.ndarray:
    """Dense emblem: a checkerboard crest of 6-pixel squares."""
    yy, xx = np.mgrid[:24, :18]
    return (((yy // 6) + (xx // 6)) % 2 == 0).astype(np.uint8)


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for symbol, art in GLYPHS.items():
        grid = parse(art)
        assert grid.shape[0] == 12, (symbol, grid.shape)
        bits = np.kron(grid, np.ones((2, 2), dtype=np.uint8))
        write_netpbm(BinaryImage(tight(bits)), OUT / f"{symbol}.pbm")
    write_netpbm(BinaryImage(special_a()), OUT / "SPECIAL_A.pbm")
    write_netpbm(BinaryImage(special_b()), OUT / "SPECIAL_B.pbm")


if __name__ == "__main__":
    main()
