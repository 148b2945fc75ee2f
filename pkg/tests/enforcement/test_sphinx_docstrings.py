"""
Enforcement test for Sphinx docstring format compliance.

Every package and test module is checked for:
- :ptype rather than :type for parameter types
- :param/:ptype for each parameter and :return/:rtype for annotated returns
  of public functions
- docstrings starting with a capital letter (PEP 257)
"""

import ast
import re
from pathlib import Path

import pytest

PROJECT_ROOT = Path(__file__).parent.parent.parent
SOURCE_DIRS = ("src/periodic_asymptotics", "tests")
TYPE_FIELD = re.compile(r":type\s+\w+:")
FUNCTIONS = (ast.FunctionDef, ast.AsyncFunctionDef)
PROPERTIES = {"property", "cached_property"}


def _python_files() -> list[Path]:
    """
    Python files under the checked directories, this file excluded.

    :return: Sorted file paths
    :rtype: list[Path]
    """
    files = [path for source in SOURCE_DIRS for path in (PROJECT_ROOT / source).rglob("*.py")]
    return sorted(path for path in files if path.name != Path(__file__).name and "__pycache__" not in path.parts)


def _docstring(node: ast.AST) -> str | None:
    """
    Docstring of a function or class node.

    :param node: AST node
    :ptype node: ast.AST
    :return: Docstring or None
    :rtype: str | None
    """
    if isinstance(node, (*FUNCTIONS, ast.ClassDef)):
        return ast.get_docstring(node, clean=False)
    return None


def _is_public(node: ast.FunctionDef | ast.AsyncFunctionDef) -> bool:
    """
    True for functions whose docstrings need every section.

    :param node: Function node
    :ptype node: ast.FunctionDef | ast.AsyncFunctionDef
    :return: Whether the function is public, not a test and not a property
    :rtype: bool
    """
    if node.name.startswith("test_") or (node.name.startswith("_") and not node.name.startswith("__")):
        return False
    return not any(isinstance(dec, ast.Name) and dec.id in PROPERTIES for dec in node.decorator_list)


def _missing_sections(node: ast.FunctionDef | ast.AsyncFunctionDef) -> list[str]:
    """
    Sections a public function docstring lacks.

    :param node: Function node
    :ptype node: ast.FunctionDef | ast.AsyncFunctionDef
    :return: Missing section markers
    :rtype: list[str]
    """
    docstring = _docstring(node)
    if not docstring:
        return ["docstring"]
    params = [arg.arg for arg in node.args.args if arg.arg not in ("self", "cls")]
    wanted = [f":{field} {name}:" for name in params for field in ("param", "ptype")]
    returns_none = isinstance(node.returns, ast.Constant) and node.returns.value is None
    if node.returns is not None and not returns_none:
        wanted += [":return:", ":rtype:"]
    return [marker for marker in wanted if marker not in docstring]


@pytest.fixture(scope="module")
def parsed() -> dict[Path, ast.Module]:
    """
    Syntax trees of all checked files.

    :return: Tree per file
    :rtype: dict[Path, ast.Module]
    """
    files = _python_files()
    assert files, "no Python files found to check"
    return {path: ast.parse(path.read_text(encoding="utf-8"), filename=str(path)) for path in files}


class TestSphinxDocstringEnforcement:
    """Test suite enforcing Sphinx docstring format."""

    def test_no_type_field_usage(self, parsed):
        """
        Test that :ptype is used instead of :type for parameter types.

        :param parsed: Fixture providing syntax trees per file
        :ptype parsed: dict[Path, ast.Module]
        """
        violations = [
            f"{path}:{line_no}: {line.strip()}"
            for path in parsed
            for line_no, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1)
            if TYPE_FIELD.search(line)
        ]

        assert not violations, "use ':ptype name:' instead of ':type name:'\n" + "\n".join(violations)

    def test_required_docstring_sections(self, parsed):
        """
        Test that public functions document every parameter and annotated return.

        :param parsed: Fixture providing syntax trees per file
        :ptype parsed: dict[Path, ast.Module]
        """
        violations = [
            f"{path}:{node.lineno} {node.name}: missing {', '.join(missing)}"
            for path, tree in parsed.items()
            for node in ast.walk(tree)
            if isinstance(node, FUNCTIONS) and _is_public(node) and (missing := _missing_sections(node))
        ]

        assert not violations, "document all parameters and returns\n" + "\n".join(violations)

    def test_docstring_capitalization(self, parsed):
        """
        Test that docstrings start with a capital letter per PEP 257.

        :param parsed: Fixture providing syntax trees per file
        :ptype parsed: dict[Path, ast.Module]
        """
        violations = []
        for path, tree in parsed.items():
            for node in ast.walk(tree):
                first = next((line.strip() for line in (_docstring(node) or "").splitlines() if line.strip()), "")
                if first and first[0] not in ":>`-*#" and not first[0].isupper():
                    violations.append(f"{path}:{node.lineno} {node.name}: {first[:60]}")

        assert not violations, "docstrings must start with a capital letter\n" + "\n".join(violations)
