import logging
import sys

from rich.console import Console
from rich.logging import RichHandler

logger: logging.Logger = logging.getLogger('connforge')
console = Console(file=sys.stderr)
logger.addHandler(RichHandler(tracebacks_show_locals=True, console=console))

from .calculus import *
from .geometry import *
from .connections import *
from .verify import *
from .catalog import CatalogEntry, get_entry, list_entries, export_entry
from .exceptions import *
from .utils import Settings, dumps_json
