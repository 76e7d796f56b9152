import logging

__version__ = '0.1.0'

# silence logging for namespace "appease" (and any submodules)
logging.getLogger(__name__).addHandler(logging.NullHandler())
