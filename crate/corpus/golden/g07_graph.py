from collections import deque


class Graph:
    def __init__(self):
        self.adj = {}

    def add_edge(self, u, v):
        self.adj.setdefault(u, set()).add(v)
        self.adj.setdefault(v, set())

    def neighbors(self, u):
        return sorted(self.adj.get(u, ()))

    def bfs(self, start):
        seen = {start}
        order = []
        queue = deque([start])
        while queue:
            node = queue.popleft()
            order.append(node)
            for nxt in self.neighbors(node):
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
        return order

    def has_cycle(self):
        state = dict.fromkeys(self.adj, 0)

        def visit(n):
            state[n] = 1
            for m in self.adj[n]:
                if state[m] == 1 or (state[m] == 0 and visit(m)):
                    return True
            state[n] = 2
            return False

        return any(visit(n) for n in self.adj if state[n] == 0)
