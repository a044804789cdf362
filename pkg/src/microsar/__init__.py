#!/usr/bin/python3.10
########################################################################################
# __init__.py - The init module for the microsar package.                              #
#                                                                                      #
# Author: microsar developers                                                          #
# Copyright: microsar developers, 2024                                                 #
# Date created: 14/10/2024                                                             #
# License: MIT, Open-source                                                            #
########################################################################################
