import string

PUNCT = set(string.punctuation)


class Token:
    def __init__(self, kind, text, pos):
        self.kind = kind
        self.text = text
        self.pos = pos

    def __repr__(self):
        return f"Token({self.kind!r}, {self.text!r})"


def tokenize(source):
    out = []
    i = 0
    n = len(source)
    while i < n:
        ch = source[i]
        if ch.isspace():
            i += 1
        elif ch.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            out.append(Token("num", source[i:j], i))
            i = j
        elif ch in PUNCT:
            out.append(Token("op", ch, i))
            i += 1
        else:
            start = i
            while i < n and not source[i].isspace() and source[i] not in PUNCT:
                i += 1
            word = source[start:i]
            out.append(Token("word", word, start))
    return out
