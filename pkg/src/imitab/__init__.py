__appname__ = "imitab"
__version__ = "0.1.0"
__license__ = "GPL-3.0"
