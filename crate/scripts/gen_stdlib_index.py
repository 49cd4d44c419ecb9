"""Regenerate crates/core/data/stdlib_index.json from the running interpreter.

The index maps every importable standard-library module to the public
callables it exports (top-level functions, classes, and the public methods of
its classes), and every builtin value type to its public methods.

    python3 scripts/gen_stdlib_index.py > crates/core/data/stdlib_index.json
"""

import importlib
import inspect
import io
import json
import sys
import warnings

SKIP_PREFIXES = ("idlelib", "tkinter", "turtledemo", "test", "lib2to3", "ensurepip", "antigravity", "this")

BUILTIN_TYPES = {
    "str": str,
    "bytes": bytes,
    "bytearray": bytearray,
    "list": list,
    "dict": dict,
    "set": set,
    "frozenset": frozenset,
    "tuple": tuple,
    "int": int,
    "float": float,
    "complex": complex,
    "file": io.TextIOWrapper,
}


def public_methods(cls):
    out = set()
    for name in dir(cls):
        if name.startswith("_") and name != "__init__":
            continue
        try:
            attr = getattr(cls, name)
        except Exception:
            continue
        if callable(attr):
            out.add(name)
    return out


def module_callables(mod):
    out = set()
    for name in getattr(mod, "__all__", None) or dir(mod):
        if not isinstance(name, str) or name.startswith("_"):
            continue
        try:
            attr = getattr(mod, name)
        except Exception:
            continue
        if inspect.ismodule(attr):
            if getattr(attr, "__name__", "").startswith(mod.__name__ + "."):
                out |= module_callables_shallow(attr)
            continue
        if inspect.isclass(attr):
            out.add(name)
            out |= {m for m in public_methods(attr) if m != "__init__"}
        elif callable(attr):
            out.add(name)
    return out


def module_callables_shallow(mod):
    out = set()
    for name in dir(mod):
        if name.startswith("_"):
            continue
        try:
            attr = getattr(mod, name)
        except Exception:
            continue
        if callable(attr) and not inspect.ismodule(attr):
            out.add(name)
    return out


def main():
    warnings.simplefilter("ignore")
    modules = {}
    for name in sorted(sys.stdlib_module_names):
        if name.startswith("_") or name.startswith(SKIP_PREFIXES):
            continue
        try:
            mod = importlib.import_module(name)
        except BaseException:
            continue
        names = module_callables(mod)
        if names:
            modules[name] = sorted(names)
    for sub in ("os.path", "xml.etree.ElementTree", "urllib.parse", "urllib.request", "email.message",
                "concurrent.futures", "importlib.metadata", "logging.handlers", "collections.abc"):
        try:
            modules[sub] = sorted(module_callables(importlib.import_module(sub)))
        except BaseException:
            pass
    types = {t: sorted(public_methods(cls) - {"__init__"}) for t, cls in BUILTIN_TYPES.items()}
    json.dump(
        {
            "format_version": 1,
            "python": "%d.%d.%d" % sys.version_info[:3],
            "modules": modules,
            "types": types,
        },
        sys.stdout,
        indent=0,
        sort_keys=True,
    )
    sys.stdout.write("\n")


if __name__ == "__main__":
    main()
