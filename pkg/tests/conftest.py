"""Pytest fixtures for the primary suite; helpers live in support.py."""

import pytest

from support import TOY10_ROWS, bind_sex_table
from fairspec import cli


@pytest.fixture
def run_cli(capsys):
    """Invoke the CLI in-process; returns (exit_code, stdout, stderr)."""

    def run(*args: str) -> tuple[int, str, str]:
        code = cli.main(list(args))
        captured = capsys.readouterr()
        return code, captured.out, captured.err

    return run


@pytest.fixture
def toy10_bound():
    return bind_sex_table(TOY10_ROWS)
