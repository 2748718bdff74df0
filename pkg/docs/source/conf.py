# -*- coding: utf-8 -*-
#
# Sphinx configuration for sgd-dmft.
import os
import sys

sys.path.insert(0, os.path.abspath('../..'))

# -- Project information -----------------------------------------------------

project = 'sgd-dmft'
copyright = '2026, Apkawa <apkawa@gmail.com'
author = 'Apkawa <apkawa@gmail.com'

# The short X.Y version
version = '0.1'
# The full version, including alpha/beta/rc tags
release = '0.1.0'

# -- General configuration ---------------------------------------------------

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.mathjax',
]
autodoc_mock_imports = ['numpy', 'scipy', 'yaml', 'dateutil']

templates_path = ['_templates']

from recommonmark.parser import CommonMarkParser

source_parsers = {
    '.md': CommonMarkParser,
}

source_suffix = ['.rst', '.md']

master_doc = 'index'
language = 'en'
exclude_patterns = []
pygments_style = 'sphinx'

# -- Options for HTML output -------------------------------------------------

html_theme = 'alabaster'
html_static_path = ['_static']
htmlhelp_basename = 'sgd-dmftdoc'

# -- Options for LaTeX and manual page output --------------------------------

latex_elements = {}
latex_documents = [
    (master_doc, 'sgd-dmft.tex', 'sgd-dmft Documentation', 'Apkawa', 'manual'),
]
man_pages = [
    (master_doc, 'sgd-dmft', 'sgd-dmft Documentation', [author], 1)
]

from recommonmark.transform import AutoStructify


def setup(app):
    git_doc_root = 'https://github.com/Apkawa/sgd-dmft/blob/master/docs/'
    app.add_config_value('recommonmark_config', {
        'url_resolver': lambda url: git_doc_root + url,
        'auto_toc_tree_section': 'Contents',
    }, True)
    app.add_transform(AutoStructify)
