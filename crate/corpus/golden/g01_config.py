import json
import os


def load_config(path, defaults=None):
    settings = dict(defaults or {})
    with open(path) as handle:
        raw = json.load(handle)
    for key, value in raw.items():
        settings[key] = value
    env_prefix = settings.get("prefix", "APP_")
    for name in os.environ:
        if name.startswith(env_prefix):
            short = name[len(env_prefix):].lower()
            settings[short] = os.environ[name]
    return settings


def merge(base, extra):
    result = base.copy()
    result.update(extra)
    return result


class Config:
    def __init__(self, path):
        self.path = path
        self.data = load_config(path)

    def get(self, key, fallback=None):
        value = self.data.get(key)
        if value is None:
            value = fallback
        return value

    def reload(self):
        fresh = load_config(self.path)
        self.data = merge(self.data, fresh)
        return self.data
