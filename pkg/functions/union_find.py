from typing import Dict, Hashable, Iterable, List


class DisjointSet:
    """Система непересекающихся множеств со сжатием путей и объединением по размеру"""

    __slots__ = ("_parent", "_size")

    def __init__(self, items: Iterable[Hashable] = ()):
        self._parent: Dict[Hashable, Hashable] = {}
        self._size: Dict[Hashable, int] = {}
        for item in items:
            self.add(item)

    def add(self, item: Hashable) -> None:
        if item not in self._parent:
            self._parent[item] = item
            self._size[item] = 1

    def find(self, item: Hashable) -> Hashable:
        parent = self._parent
        root = item
        while parent[root] != root:
            root = parent[root]
        # Сжатие пути
        while parent[item] != root:
            parent[item], item = root, parent[item]
        return root

    def union(self, a: Hashable, b: Hashable) -> bool:
        """Объединяет множества; False, если a и b уже в одном множестве"""
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self._size[ra] < self._size[rb]:
            ra, rb = rb, ra
        self._parent[rb] = ra
        self._size[ra] += self._size[rb]
        return True

    def connected(self, a: Hashable, b: Hashable) -> bool:
        return self.find(a) == self.find(b)

    def groups(self) -> List[List[Hashable]]:
        result: Dict[Hashable, List[Hashable]] = {}
        for item in self._parent:
            result.setdefault(self.find(item), []).append(item)
        return list(result.values())

    def __len__(self) -> int:
        return len(self._parent)

    def __contains__(self, item: Hashable) -> bool:
        return item in self._parent
