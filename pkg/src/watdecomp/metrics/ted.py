"""Ordered labeled tree edit distance (Zhang & Shasha keyroot dynamic program).

Unit costs: insert 1, delete 1, relabel 1 if labels differ else 0.
"""

from __future__ import annotations

from ..cparse import LabeledTree


class _Indexed:
    """Post-order labels, leftmost-leaf indices and keyroots of a tree."""

    def __init__(self, tree: LabeledTree):
        labels: list[str] = []
        lml: list[int] = []
        # iterative post-order; each frame is (node, child cursor, leftmost leaf)
        stack: list[list] = [[tree, 0, None]]
        while stack:
            frame = stack[-1]
            node, i = frame[0], frame[1]
            if i < len(node.children):
                frame[1] += 1
                stack.append([node.children[i], 0, None])
                continue
            stack.pop()
            idx = len(labels)
            labels.append(node.label)
            leftmost = frame[2] if frame[2] is not None else idx
            lml.append(leftmost)
            if stack and stack[-1][2] is None:
                stack[-1][2] = leftmost
        self.labels = labels
        self.lml = lml
        seen: dict[int, int] = {}
        for i, l in enumerate(lml):
            seen[l] = i  # highest node sharing each leftmost leaf
        self.keyroots = sorted(seen.values())


def tree_edit_distance(t1: LabeledTree, t2: LabeledTree) -> int:
    a = _Indexed(t1)
    b = _Indexed(t2)
    la, lb = a.lml, b.lml
    na, nb = len(a.labels), len(b.labels)
    td = [[0] * nb for _ in range(na)]
    for i in a.keyroots:
        for j in b.keyroots:
            li, lj = la[i], lb[j]
            rows = i - li + 2
            cols = j - lj + 2
            fd = [[0] * cols for _ in range(rows)]
            for x in range(1, rows):
                fd[x][0] = x
            for y in range(1, cols):
                fd[0][y] = y
            for x in range(1, rows):
                ix = li + x - 1
                fdx, fdx1 = fd[x], fd[x - 1]
                lix = la[ix]
                lab = a.labels[ix]
                for y in range(1, cols):
                    jy = lj + y - 1
                    if lix == li and lb[jy] == lj:
                        cost = 0 if lab == b.labels[jy] else 1
                        v = min(fdx1[y] + 1, fdx[y - 1] + 1, fdx1[y - 1] + cost)
                        fdx[y] = v
                        td[ix][jy] = v
                    else:
                        p = lix - li
                        q = lb[jy] - lj
                        fdx[y] = min(fdx1[y] + 1, fdx[y - 1] + 1, fd[p][q] + td[ix][jy])
    return td[na - 1][nb - 1]


def aed_similarity(t1: LabeledTree, t2: LabeledTree) -> float:
    """1 - TED / larger tree size, clamped to [0, 1]."""
    n = max(t1.size(), t2.size())
    sim = 1.0 - tree_edit_distance(t1, t2) / n
    return min(1.0, max(0.0, sim))
