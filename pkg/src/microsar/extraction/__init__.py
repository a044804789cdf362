#!/usr/bin/python3.10
########################################################################################
# __init__.py - The extraction sub-package of microsar.                                #
#                                                                                      #
# Author: microsar developers                                                          #
# Copyright: microsar developers, 2024                                                 #
# Date created: 15/10/2024                                                             #
# License: MIT, Open-source                                                            #
########################################################################################

from .callgraph import build_call_graph
from .extractor import (
    classify_source_unit,
    classify_unit,
    discover_services,
    ExtractionCache,
    extract_endpoints,
    extract_entity,
    extract_rest_calls,
    load_service_map,
    scan_repository,
)
from .profile import load_profile, MarkerProfile, profile_from_document, RemoteCallPattern

__all__ = (
    "build_call_graph",
    "classify_source_unit",
    "classify_unit",
    "discover_services",
    "ExtractionCache",
    "extract_endpoints",
    "extract_entity",
    "extract_rest_calls",
    "load_profile",
    "load_service_map",
    "MarkerProfile",
    "profile_from_document",
    "RemoteCallPattern",
    "scan_repository",
)
