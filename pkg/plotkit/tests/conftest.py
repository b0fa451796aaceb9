import pytest

# skip this whole directory when the plotting package is not installed;
# the primary suite must run without it
# probe a concrete module: the bare source directory is visible as an empty
# namespace package even when plotkit is not installed
pytest.importorskip("plotkit.render")
