#!/usr/bin/env python3
#
# quadie documentation build configuration file.
#
# This file is execfile()d with the current directory set to its
# containing dir.
import datetime as dt

import quadie

# -- General configuration ------------------------------------------------

extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.intersphinx",
    "sphinx.ext.napoleon",
    "sphinx.ext.mathjax",
    "sphinx.ext.todo",
    "IPython.sphinxext.ipython_directive",
    "IPython.sphinxext.ipython_console_highlighting",
]

templates_path = ["_templates"]
source_suffix = ".rst"
master_doc = "index"

project = "quadie"
copyright = f"{dt.date.today().year}, The quadie Development Team"
author = "The quadie Development Team"

# The short X.Y version, plus the commit when built from a checkout.
version = quadie.__version__.split("+")[0]
if "+" in quadie.__version__ and "dev" in quadie.__version__:
    commit = quadie.__version__.split("dev")[1]
    commits_since_tag, commit_hash = commit.split("+")
    version += " (+" + commits_since_tag + ", " + commit_hash + ")"
release = quadie.__version__

with open("_version.txt", "w") as version_file:
    doc_date = dt.datetime.now().strftime("%B %d, %Y")
    version_file.write(f"Version: **{version}** Date: **{doc_date}**\n")

language = "en"
exclude_patterns = []
pygments_style = "default"
todo_include_todos = True

autodoc_member_order = "bysource"
napoleon_numpy_docstring = True
napoleon_google_docstring = False

# -- Options for HTML output ----------------------------------------------

html_theme = "pydata_sphinx_theme"
html_theme_options = {"external_links": []}
html_static_path = []
html_sidebars = {"**": ["relations.html", "searchbox.html"]}
htmlhelp_basename = "quadiedoc"

# -- Options for LaTeX output ---------------------------------------------

latex_elements = {}
latex_documents = [
    (master_doc, "quadie.tex", "quadie Documentation", author, "manual")
]

# -- Options for manual page output ---------------------------------------

man_pages = [(master_doc, "quadie", "quadie Documentation", [author], 1)]

# -- Options for Texinfo output -------------------------------------------

texinfo_documents = [
    (
        master_doc,
        "quadie",
        "quadie Documentation",
        author,
        "quadie",
        "Certify and solve quadratic integral equations.",
        "Miscellaneous",
    )
]

intersphinx_mapping = {
    "python": ("https://docs.python.org/3", None),
    "numpy": ("https://numpy.org/doc/stable/", None),
    "pandas": ("https://pandas.pydata.org/pandas-docs/stable/", None),
    "scipy": ("https://docs.scipy.org/doc/scipy/", None),
}
