"""
Shared pytest configuration.
"""

from hypothesis import settings

# Matrix factorizations make the first examples slow on cold caches.
settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")
