#!/usr/bin/env python
# -*- encoding: utf-8 -*-
"""Exception classes for covertmdp"""


class CovertMdpError(Exception):
    """The root covertmdp exception class"""

    pass


class ParameterError(CovertMdpError):
    """Exception class for mal-formed inputs"""

    pass


class GuardError(CovertMdpError):
    """Exception class for problems too large to solve exactly"""

    pass
