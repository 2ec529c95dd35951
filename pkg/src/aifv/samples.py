"""Small hand-built AIFV codes used as golden fixtures.

Each code is pinned by its per-tree average lengths and by a printed
encoding of a short source sequence; see the tests for both checks.
"""

from .core import SourceDistribution
from .tree import AifvCode, tree_from_table


def abcd_two_tree() -> AifvCode:
    """Two trees over a,b,c,d; c is a degree-1 master in both trees."""
    t0 = tree_from_table({"a": "0", "b": "10", "c": "11", "d": "1100"})
    t1 = tree_from_table({"a": "01", "b": "10", "c": "11", "d": "1100"})
    return AifvCode((t0, t1), "abcd")


def abcd_two_tree_source() -> SourceDistribution:
    return SourceDistribution(tuple("abcd"), (0.45, 0.3, 0.2, 0.05))


def abc_root_master() -> AifvCode:
    """Two trees over a,b,c with a sitting on the root of T_0 (null codeword)."""
    t0 = tree_from_table({"a": "", "b": "000", "c": "001"})
    t1 = tree_from_table({"a": "1", "b": "010", "c": "011"})
    return AifvCode((t0, t1), "abc")


def abcd_three_tree() -> AifvCode:
    """Three trees over a,b,c,d; c has degree 1 in T_0 and degree 2 in T_1."""
    t0 = tree_from_table({"a": "0", "b": "10", "c": "11", "d": "1100"})
    t1 = tree_from_table({"a": "01", "b": "10", "c": "11", "d": "11000"})
    t2 = tree_from_table({"a": "1", "b": "01", "c": "0010", "d": "0011"})
    return AifvCode((t0, t1, t2), "abcd")


def abcd_three_tree_source() -> SourceDistribution:
    return SourceDistribution(tuple("abcd"), (0.65, 0.2, 0.1, 0.05))


def abc_three_tree() -> AifvCode:
    """Three trees over a,b,c; a is a root master in T_0 (degree 2) and T_2 (degree 1)."""
    t0 = tree_from_table({"a": "", "b": "0000", "c": "0001"})
    t1 = tree_from_table({"a": "1", "b": "010", "c": "011"})
    t2 = tree_from_table({"a": "", "b": "0010", "c": "0011"})
    return AifvCode((t0, t1, t2), "abc")


def abc_skewed_source() -> SourceDistribution:
    return SourceDistribution(tuple("abc"), (0.98, 0.01, 0.01))


SAMPLES = {
    "abcd2": (abcd_two_tree, abcd_two_tree_source),
    "abc2": (abc_root_master, None),
    "abcd3": (abcd_three_tree, abcd_three_tree_source),
    "abc3": (abc_three_tree, abc_skewed_source),
}
