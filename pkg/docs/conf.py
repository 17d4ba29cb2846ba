# -*- coding: utf-8 -*-
#
# covertmdp documentation build configuration file.
#
# This file is execfile()d with the current directory set to its containing dir.
#
# All configuration values have a default; values that are commented out
# serve to show the default.

import os
import sys
from pathlib import Path
import sphinx

# This song and dance enables builds from outside the docs directory
srcpath = os.path.abspath(Path(os.path.dirname(__file__)) / "..")
sys.path.insert(0, srcpath)

# -- General configuration -----------------------------------------------------

if sphinx.__version__ < "2.0":
    raise RuntimeError("Sphinx 2.0 or newer is required")

needs_sphinx = "2.0"

from importlib.machinery import SourceFileLoader

covertmdp_version = SourceFileLoader(
    "covertmdp.version", os.path.abspath(Path(srcpath) / "covertmdp" / "version.py")
).load_module()

# The short X.Y version.
version = covertmdp_version.short_version
# The full version, including alpha/beta/rc tags.
release = covertmdp_version.version

extensions = [
    "sphinx.ext.autodoc",  # function indexing
    "sphinx.ext.autosummary",
    "sphinx.ext.viewcode",  # source linkage
    "sphinx.ext.intersphinx",  # cross-linkage
    "sphinx.ext.mathjax",
    "numpydoc",  # docstring examples
]

autosummary_generate = True

# --------
# Doctest
# --------

doctest_global_setup = """
import numpy as np
import scipy
import covertmdp
np.set_printoptions(precision=3, linewidth=64, edgeitems=2, threshold=200)
"""

numpydoc_show_class_members = False

intersphinx_mapping = {
    "python": ("https://docs.python.org/3", None),
    "numpy": ("https://numpy.org/doc/stable/", None),
    "scipy": ("https://docs.scipy.org/doc/scipy/reference/", None),
    "joblib": ("https://joblib.readthedocs.io/en/latest/", None),
    "numba": ("https://numba.pydata.org/numba-doc/latest", None),
}

# Add any paths that contain templates here, relative to this directory.
templates_path = ["_templates"]

# The suffix of source filenames.
source_suffix = ".rst"

# The master toctree document.
master_doc = "index"

# General information about the project.
project = u"covertmdp"
copyright = u"2021, covertmdp development team"

# List of patterns, relative to source directory, that match files and
# directories to ignore when looking for source files.
exclude_patterns = ["_build"]

# The reST default role (used for this markup: `text`) to use for all documents.
default_role = "autolink"

# The name of the Pygments (syntax highlighting) style to use.
pygments_style = "sphinx"

# -- Options for HTML output ---------------------------------------------------

html_theme = "sphinx_rtd_theme"

html_theme_options = {
    "collapse_navigation": False,
}

# Output file base name for HTML help builder.
htmlhelp_basename = "covertmdpdoc"

# -- Options for LaTeX output --------------------------------------------------

latex_documents = [
    (
        "index",
        "covertmdp.tex",
        u"covertmdp Documentation",
        u"The covertmdp development team",
        "manual",
    )
]

# -- Options for manual page output --------------------------------------------

man_pages = [
    ("index", "covertmdp", u"covertmdp Documentation", [u"The covertmdp development team"], 1)
]
