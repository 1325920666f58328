"""ABOUT
"""

APP_NAME = "recondg"
VERSION = "v0.3.0"
AUTHOR = "Pavel Revak"
AUTHOR_EMAIL = "pavel.revak@gmail.com"
DESCRIPTION = "recondg - DG solver with one unknown per element on polygonal meshes"
LONG_DESCRIPTION = DESCRIPTION + (
    "\n\nLeast-squares reconstruction of piecewise polynomials from cell "
    "values, used in a symmetric interior penalty method.")
KEYWORDS = "DG discontinuous-galerkin polygonal-mesh least-squares reconstruction"
LICENSE = "MIT"
