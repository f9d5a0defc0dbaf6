#!/usr/bin/env python3
#
# locapart documentation build configuration file.
#
# This file is execfile()d with the current directory set to its containing dir.

import sys, os

# The package lives two levels up from this directory.
up2 = os.path.join(os.pardir, os.pardir)
sys.path.insert(0, os.path.abspath(up2))
import locapart

# -- General configuration -----------------------------------------------------

extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.doctest",
    "sphinx.ext.viewcode",
    "sphinx.ext.mathjax",
    "sphinx.ext.napoleon",
]

templates_path = ['_templates']

source_suffix = '.rst'

master_doc = 'index'

project = 'locapart'
copyright = '2024, the locapart developers'

version = locapart.__version__
release = locapart.__version__

exclude_patterns = []

pygments_style = 'sphinx'

# numpy-style "Parameters" and "Returns" sections
napoleon_google_docstring = False
napoleon_numpy_docstring = True

autodoc_member_order = 'bysource'

# -- Options for HTML output ---------------------------------------------------

html_title = "locapart Documentation"

html_static_path = []

html_use_index = True

html_show_sphinx = False

htmlhelp_basename = 'locapartdoc'

# -- Options for LaTeX output --------------------------------------------------

latex_documents = [
  ('index', 'locapart.tex', 'locapart Documentation',
   'the locapart developers', 'manual'),
]

# -- Options for manual page output --------------------------------------------

man_pages = [
    ('index', 'locapart', 'locapart Documentation',
     ['the locapart developers'], 1)
]
