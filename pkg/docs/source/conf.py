# -*- coding: utf-8 -*-
#
# fastswitch documentation build configuration file.

import os
import sys

sys.path.insert(0, os.path.abspath('../..'))

import sphinx_rtd_theme

# -- General configuration ------------------------------------------------

extensions = ['sphinx.ext.autodoc', 'sphinx.ext.mathjax']

templates_path = ['_templates']

source_suffix = '.rst'

master_doc = 'index'

project = u'fastswitch'
copyright = u'2024, The fastswitch developers'
author = u'The fastswitch developers'

version = u'0.1.0'
release = u'0.1.0'

language = None

exclude_patterns = []

pygments_style = 'sphinx'

todo_include_todos = False

# -- Options for HTML output ----------------------------------------------

html_theme = "sphinx_rtd_theme"
html_theme_path = [sphinx_rtd_theme.get_html_theme_path()]

htmlhelp_basename = 'fastswitchdoc'

html_sidebars = { '**': ['globaltoc.html', 'relations.html', 'sourcelink.html', 'searchbox.html'], }

# -- Options for manual page output ---------------------------------------

man_pages = [
    (master_doc, 'fastswitch', u'fastswitch Documentation',
     [author], 1)
]
