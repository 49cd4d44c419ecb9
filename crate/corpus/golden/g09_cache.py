import hashlib
import pickle
from pathlib import Path


class DiskCache:
    def __init__(self, root, max_items=100):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.max_items = max_items

    def _key_path(self, key):
        digest = hashlib.sha1(key.encode()).hexdigest()
        return self.root / digest[:2] / digest

    def get(self, key, default=None):
        path = self._key_path(key)
        if not path.exists():
            return default
        with path.open("rb") as fh:
            return pickle.load(fh)

    def set(self, key, value):
        path = self._key_path(key)
        path.parent.mkdir(exist_ok=True)
        data = pickle.dumps(value)
        path.write_bytes(data)
        self._evict()

    def _evict(self):
        files = sorted(self.root.glob("*/*"), key=lambda f: f.stat().st_mtime)
        excess = len(files) - self.max_items
        for old in files[:max(excess, 0)]:
            old.unlink()
