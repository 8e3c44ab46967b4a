"""Built-in examples, spec-file loading and expected-property assertions."""
from bitensionlab.catalog.assertions import confirm_expected, corollary_assertions, measure
from bitensionlab.catalog.builtins import EXAMPLES, FAMILY_PARAMS, ExampleSpec, Expected, example_names, get_example
from bitensionlab.catalog.specfile import load_spec_file, load_spec_text

__all__ = [
    "EXAMPLES",
    "FAMILY_PARAMS",
    "ExampleSpec",
    "Expected",
    "confirm_expected",
    "corollary_assertions",
    "example_names",
    "get_example",
    "load_spec_file",
    "load_spec_text",
    "measure",
]
