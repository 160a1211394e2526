"""Shared fixtures: ephemeral-port servers and reusable tasks."""

import contextlib

import pytest

from palsim.server import PalServer, ServerConfig
from palsim.tasks import generate_huga, generate_pogo


@contextlib.contextmanager
def running_server(task=None, **config_kw):
    """A PalServer on ephemeral ports, torn down afterwards."""
    config_kw.setdefault("agent_port", 0)
    config_kw.setdefault("control_port", 0)
    server = PalServer(ServerConfig(**config_kw), initial_task=task)
    server.start()
    try:
        yield server
    finally:
        server.stop()


@pytest.fixture
def server_factory():
    with contextlib.ExitStack() as stack:
        def make(task=None, **kw):
            return stack.enter_context(running_server(task, **kw))
        yield make


@pytest.fixture
def pogo_task():
    return generate_pogo(100)


@pytest.fixture
def huga_task():
    return generate_huga(100)
