#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""Function caching"""

import os
from joblib import Memory


class CacheManager(object):
    """Wraps joblib.Memory with a __call__ attribute so that it may act
    as a decorator factory.

    A caching level filter decides which functions are memoized:
    a function decorated with ``@cache(level=k)`` is cached only when
    the manager's level is at least ``k``.
    """

    def __init__(self, *args, **kwargs):

        level = kwargs.pop("level", 10)

        self.memory = Memory(*args, **kwargs)
        # smaller numbers mean less caching
        self.level = level

    def __call__(self, level):
        """Example usage:

        @cache(level=20)
        def expensive_enumeration(num_states, n):
            ...
        """

        def wrapper(function):
            """Add an input/output cache to ``function``."""

            from decorator import FunctionMaker

            def decorator_apply(dec, func):
                """Decorate ``func`` with ``dec``, preserving the signature."""

                return FunctionMaker.create(
                    func,
                    "return decorated(%(signature)s)",
                    dict(decorated=dec(func)),
                    __wrapped__=func,
                )

            if self.memory.location is not None and self.level >= level:
                return decorator_apply(self.memory.cache, function)

            return function

        return wrapper

    def clear(self, *args, **kwargs):
        return self.memory.clear(*args, **kwargs)

    def reduce_size(self, *args, **kwargs):
        return self.memory.reduce_size(*args, **kwargs)


# Instantiate the cache from the environment
cache = CacheManager(
    os.environ.get("COVERTMDP_CACHE_DIR", None),
    mmap_mode=os.environ.get("COVERTMDP_CACHE_MMAP", None),
    compress=os.environ.get("COVERTMDP_CACHE_COMPRESS", False),
    verbose=int(os.environ.get("COVERTMDP_CACHE_VERBOSE", 0)),
    level=int(os.environ.get("COVERTMDP_CACHE_LEVEL", 10)),
)
