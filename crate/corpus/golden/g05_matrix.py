def zeros(rows, cols):
    return [[0] * cols for _ in range(rows)]


def transpose(m):
    return [list(col) for col in zip(*m)]


def multiply(a, b):
    n = len(a)
    k = len(b)
    p = len(b[0])
    out = zeros(n, p)
    for i in range(n):
        row = a[i]
        for j in range(p):
            acc = 0
            for t in range(k):
                acc += row[t] * b[t][j]
            out[i][j] = acc
    return out


def identity(n):
    m = zeros(n, n)
    for i in range(n):
        m[i][i] = 1
    return m


def power(m, e):
    result = identity(len(m))
    base = m
    while e > 0:
        if e % 2 == 1:
            result = multiply(result, base)
        base = multiply(base, base)
        e //= 2
    return result
