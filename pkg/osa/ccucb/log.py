import logging

logger = logging.getLogger("osa.ccucb")
