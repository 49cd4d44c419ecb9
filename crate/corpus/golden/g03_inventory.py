from dataclasses import dataclass, field


@dataclass
class Item:
    name: str
    price: float
    tags: list = field(default_factory=list)


class Inventory:
    def __init__(self):
        self.items = {}
        self.log = []

    def add(self, item, qty=1):
        key = item.name.lower()
        entry = self.items.setdefault(key, [item, 0])
        entry[1] += qty
        self.log.append(("add", key, qty))

    def remove(self, name, qty=1):
        key = name.lower()
        if key not in self.items:
            raise KeyError(name)
        item, have = self.items[key]
        left = have - qty
        if left <= 0:
            del self.items[key]
        else:
            self.items[key] = [item, left]
        self.log.append(("remove", key, qty))

    def value(self):
        total = 0.0
        for item, qty in self.items.values():
            total += item.price * qty
        return round(total, 2)

    def tagged(self, tag):
        return [it for it, _ in self.items.values() if tag in it.tags]
