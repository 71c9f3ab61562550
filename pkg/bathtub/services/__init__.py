"""
Estimation, regularization, histogram and simulation services.

Import from the submodules directly; schemas depend on `geometry`, so this
package keeps no eager imports.
"""
