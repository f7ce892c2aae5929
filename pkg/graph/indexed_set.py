from typing import Dict, Generic, Hashable, Iterator, List, TypeVar

T = TypeVar("T", bound=Hashable)


class IndexedSet(Generic[T]):
    """Множество с O(1) добавлением, удалением и равномерным выбором по индексу"""

    __slots__ = ("_items", "_positions")

    def __init__(self, items=()):
        self._items: List[T] = []
        self._positions: Dict[T, int] = {}
        for item in items:
            self.add(item)

    def add(self, item: T) -> None:
        if item not in self._positions:
            self._positions[item] = len(self._items)
            self._items.append(item)

    def discard(self, item: T) -> None:
        position = self._positions.pop(item, None)
        if position is None:
            return
        last = self._items.pop()
        if position < len(self._items):
            # Последний элемент занимает освободившуюся ячейку
            self._items[position] = last
            self._positions[last] = position

    def __getitem__(self, index: int) -> T:
        return self._items[index]

    def __contains__(self, item: object) -> bool:
        return item in self._positions

    def __len__(self) -> int:
        return len(self._items)

    def __iter__(self) -> Iterator[T]:
        return iter(self._items)

    def copy(self) -> "IndexedSet[T]":
        clone = IndexedSet()
        clone._items = list(self._items)
        clone._positions = dict(self._positions)
        return clone
