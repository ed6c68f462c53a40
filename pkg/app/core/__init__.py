# app/core/__init__.py

"""
Protocol state machines and the discrete-event engine.

Submodules are imported directly (`from app.core.route_ranker import ...`);
nothing is re-exported here so the models package can depend on
`app.core.errors` without import cycles.
"""
