#!/usr/bin/python3.10
########################################################################################
# conftest.py - Shared fixtures for the microsar tests.                                #
#                                                                                      #
# Author: microsar developers                                                          #
# Copyright: microsar developers, 2024                                                 #
# Date created: 17/10/2024                                                             #
# License: MIT, Open-source                                                            #
########################################################################################

"""
Materialises a small Spring system and its version history.

Three services make up the system: `ts-order` calls `ts-price`, which calls
`ts-station`. Six versions inject one anomaly per built-in rule:

- v1 adds operations on the value returned by a station service method (SMM) and
  reformats a price controller body without changing it,
- v2 removes a query annotation from the station repository (RMM),
- v3 deletes the station endpoint called by the price service (IC),
- v4 edits a comment only and adds an uncalled order endpoint (UEM),
- v5 restores the station endpoint and changes the return type of an order service
  method (SMM).

"""

import logging
import os

import pytest

from microsar.extraction import load_profile, scan_repository
from microsar.linker import build_system_ir

# Build descriptor:
#   Contents of the build descriptor marking each service directory.
BUILD_DESCRIPTOR: str = "<project><artifactId>{name}</artifactId></project>\n"

# Services:
#   The service names of the fixture system.
SERVICES: tuple[str, ...] = ("ts-order", "ts-price", "ts-station")

STATION_ENTITY: str = """package ts.station.entity;

import javax.persistence.Entity;
import javax.persistence.Id;
import lombok.Data;

@Data
@Entity
public class Station {
    @Id
    private String id;
    private String name;
    private int stayTime;
}
"""

STATION_REPOSITORY: str = """package ts.station.repository;

import org.springframework.data.jpa.repository.JpaRepository;
import org.springframework.data.jpa.repository.Query;
import ts.station.entity.Station;

public interface StationRepository extends JpaRepository<Station, String> {
    @Query("select s from Station s where s.name = ?1")
    Station findByName(String name);
}
"""

STATION_REPOSITORY_WITHOUT_QUERY: str = """package ts.station.repository;

import org.springframework.data.jpa.repository.JpaRepository;
import ts.station.entity.Station;

public interface StationRepository extends JpaRepository<Station, String> {
    Station findByName(String name);
}
"""

STATION_SERVICE: str = """package ts.station.service;

import ts.station.entity.Station;

public interface StationService {
    Station getStation(String id);
}
"""

STATION_SERVICE_IMPL: str = """package ts.station.service;

import org.springframework.beans.factory.annotation.Autowired;
import org.springframework.stereotype.Service;
import ts.station.entity.Station;
import ts.station.repository.StationRepository;

@Service
public class StationServiceImpl implements StationService {
    @Autowired
    private StationRepository repository;

    @Override
    public Station getStation(String id) {
        Station station = repository.findByName(id);
        return station;
    }
}
"""

STATION_SERVICE_IMPL_CHECKED: str = """package ts.station.service;

import org.springframework.beans.factory.annotation.Autowired;
import org.springframework.stereotype.Service;
import ts.station.entity.Station;
import ts.station.repository.StationRepository;

@Service
public class StationServiceImpl implements StationService {
    @Autowired
    private StationRepository repository;

    @Override
    public Station getStation(String id) {
        Station station = repository.findByName(id);
        station.setStayTime(0);
        station.setName("checked");
        return station;
    }
}
"""

STATION_SERVICE_IMPL_COMMENTED: str = """package ts.station.service;

import org.springframework.beans.factory.annotation.Autowired;
import org.springframework.stereotype.Service;
import ts.station.entity.Station;
import ts.station.repository.StationRepository;

@Service
public class StationServiceImpl implements StationService {
    @Autowired
    private StationRepository repository;

    @Override
    public Station getStation(String id) {
        // Stations are looked up by their name.
        Station station = repository.findByName(id);
        station.setStayTime(0);
        station.setName("checked");
        return station;
    }
}
"""

STATION_CONTROLLER: str = """package ts.station.controller;

import org.springframework.beans.factory.annotation.Autowired;
import org.springframework.web.bind.annotation.*;
import ts.station.entity.Station;
import ts.station.service.StationService;

@RestController
@RequestMapping("/api/v1/station")
public class StationController {
    @Autowired
    private StationService stationService;

    @GetMapping("/{id}")
    public Station getStation(@PathVariable String id) {
        return stationService.getStation(id);
    }
}
"""

STATION_CONTROLLER_WITHOUT_ENDPOINT: str = """package ts.station.controller;

import org.springframework.beans.factory.annotation.Autowired;
import org.springframework.web.bind.annotation.*;
import ts.station.service.StationService;

@RestController
@RequestMapping("/api/v1/station")
public class StationController {
    @Autowired
    private StationService stationService;
}
"""

PRICE_ENTITY: str = """package ts.price.entity;

import javax.persistence.Entity;
import javax.persistence.Id;
import lombok.Data;

@Data
@Entity
public class Price {
    @Id
    private String id;
    private String stationId;
    private double basicPrice;
}
"""

PRICE_REPOSITORY: str = """package ts.price.repository;

import org.springframework.data.jpa.repository.JpaRepository;
import ts.price.entity.Price;

public interface PriceRepository extends JpaRepository<Price, String> {
    Price findByStationId(String stationId);
}
"""

PRICE_SERVICE: str = """package ts.price.service;

import ts.price.entity.Price;

public interface PriceService {
    Price getPrice(String id);
}
"""

PRICE_SERVICE_IMPL: str = """package ts.price.service;

import org.springframework.beans.factory.annotation.Autowired;
import org.springframework.http.HttpMethod;
import org.springframework.http.ResponseEntity;
import org.springframework.stereotype.Service;
import org.springframework.web.client.RestTemplate;
import ts.price.entity.Price;
import ts.price.repository.PriceRepository;

@Service
public class PriceServiceImpl implements PriceService {
    private static final String STATION_SERVICE = "http://ts-station/api/v1/station/";

    @Autowired
    private PriceRepository priceRepository;

    @Autowired
    private RestTemplate restTemplate;

    @Override
    public Price getPrice(String id) {
        ResponseEntity<String> response = restTemplate.exchange(
                STATION_SERVICE + id, HttpMethod.GET, null, String.class);
        Price price = priceRepository.findByStationId(id);
        return price;
    }
}
"""

PRICE_CONTROLLER: str = """package ts.price.controller;

import org.springframework.beans.factory.annotation.Autowired;
import org.springframework.web.bind.annotation.*;
import ts.price.entity.Price;
import ts.price.service.PriceService;

@RestController
@RequestMapping("/api/v1/price")
public class PriceController {
    @Autowired
    private PriceService priceService;

    @GetMapping("/{id}")
    public Price getPrice(@PathVariable String id) {
        return priceService.getPrice(id);
    }
}
"""

PRICE_CONTROLLER_REFORMATTED: str = """package ts.price.controller;

import org.springframework.beans.factory.annotation.Autowired;
import org.springframework.web.bind.annotation.*;
import ts.price.entity.Price;
import ts.price.service.PriceService;

@RestController
@RequestMapping("/api/v1/price")
public class PriceController {

    @Autowired
    private PriceService priceService;

    @GetMapping("/{id}")
    public Price getPrice(@PathVariable String id) {

            return
                priceService.getPrice(id);

    }
}
"""

ORDER_ENTITY: str = """package ts.order.entity;

import javax.persistence.Entity;
import javax.persistence.Id;
import javax.persistence.Table;
import lombok.Data;

@Data
@Entity
@Table(name = "orders")
public class Order {
    @Id
    private String id;
    private String stationId;
    private double basicPrice;
    private String status;
}
"""

ORDER_DTO: str = """package ts.order.entity;

public class OrderDTO {
    private String id;
    private String status;

    public static OrderDTO from(Order order) {
        OrderDTO dto = new OrderDTO();
        dto.id = order.getId();
        dto.status = order.getStatus();
        return dto;
    }
}
"""

ORDER_REPOSITORY: str = """package ts.order.repository;

import org.springframework.data.jpa.repository.JpaRepository;
import ts.order.entity.Order;

public interface OrderRepository extends JpaRepository<Order, String> {
}
"""

ORDER_SERVICE: str = """package ts.order.service;

import ts.order.entity.Order;

public interface OrderService {
    Order getOrder(String id);

    Order create(Order order);
}
"""

ORDER_SERVICE_DTO: str = """package ts.order.service;

import ts.order.entity.Order;
import ts.order.entity.OrderDTO;

public interface OrderService {
    OrderDTO getOrder(String id);

    Order create(Order order);
}
"""

ORDER_SERVICE_IMPL: str = """package ts.order.service;

import org.springframework.beans.factory.annotation.Autowired;
import org.springframework.stereotype.Service;
import org.springframework.web.client.RestTemplate;
import ts.order.entity.Order;
import ts.order.repository.OrderRepository;

@Service
public class OrderServiceImpl implements OrderService {
    @Autowired
    private OrderRepository orderRepository;

    @Autowired
    private RestTemplate restTemplate;

    @Override
    public Order getOrder(String id) {
        Order order = orderRepository.getById(id);
        Double price = restTemplate.getForObject(
                "http://ts-price/api/v1/price/" + order.getStationId(), Double.class);
        order.setBasicPrice(price);
        return order;
    }

    @Override
    public Order create(Order order) {
        order.setStatus("CREATED");
        return orderRepository.save(order);
    }
}
"""

ORDER_SERVICE_IMPL_DTO: str = """package ts.order.service;

import org.springframework.beans.factory.annotation.Autowired;
import org.springframework.stereotype.Service;
import org.springframework.web.client.RestTemplate;
import ts.order.entity.Order;
import ts.order.entity.OrderDTO;
import ts.order.repository.OrderRepository;

@Service
public class OrderServiceImpl implements OrderService {
    @Autowired
    private OrderRepository orderRepository;

    @Autowired
    private RestTemplate restTemplate;

    @Override
    public OrderDTO getOrder(String id) {
        Order order = orderRepository.getById(id);
        Double price = restTemplate.getForObject(
                "http://ts-price/api/v1/price/" + order.getStationId(), Double.class);
        order.setBasicPrice(price);
        return OrderDTO.from(order);
    }

    @Override
    public Order create(Order order) {
        order.setStatus("CREATED");
        return orderRepository.save(order);
    }
}
"""

ORDER_CONTROLLER: str = """package ts.order.controller;

import org.springframework.beans.factory.annotation.Autowired;
import org.springframework.web.bind.annotation.*;
import ts.order.entity.Order;
import ts.order.service.OrderService;

@RestController
@RequestMapping("/api/v1/order")
public class OrderController {
    @Autowired
    private OrderService orderService;

    @GetMapping("/{id}")
    public Order getOrder(@PathVariable String id) {
        return orderService.getOrder(id);
    }

    @PostMapping
    public Order create(@RequestBody Order order) {
        return orderService.create(order);
    }
}
"""

ORDER_CONTROLLER_STATUS: str = """package ts.order.controller;

import org.springframework.beans.factory.annotation.Autowired;
import org.springframework.web.bind.annotation.*;
import ts.order.entity.Order;
import ts.order.service.OrderService;

@RestController
@RequestMapping("/api/v1/order")
public class OrderController {
    @Autowired
    private OrderService orderService;

    @GetMapping("/{id}")
    public Order getOrder(@PathVariable String id) {
        return orderService.getOrder(id);
    }

    @PostMapping
    public Order create(@RequestBody Order order) {
        return orderService.create(order);
    }

    @GetMapping("/status")
    public String status() {
        return "UP";
    }
}
"""

ORDER_CONTROLLER_DTO: str = """package ts.order.controller;

import org.springframework.beans.factory.annotation.Autowired;
import org.springframework.web.bind.annotation.*;
import ts.order.entity.Order;
import ts.order.entity.OrderDTO;
import ts.order.service.OrderService;

@RestController
@RequestMapping("/api/v1/order")
public class OrderController {
    @Autowired
    private OrderService orderService;

    @GetMapping("/{id}")
    public OrderDTO getOrder(@PathVariable String id) {
        return orderService.getOrder(id);
    }

    @PostMapping
    public Order create(@RequestBody Order order) {
        return orderService.create(order);
    }

    @GetMapping("/status")
    public String status() {
        return "UP";
    }
}
"""

# Source root:
#   The Java source root within each service directory.
_SOURCE_ROOT: str = os.path.join("src", "main", "java")


def _sources(service: str, package: str, files: dict[str, str]) -> dict[str, str]:
    return {
        os.path.join(service, _SOURCE_ROOT, *package.split("."), filename): text
        for filename, text in files.items()
    }


# Baseline version:
#   Repository-relative paths and contents of the first fixture version.
BASELINE_VERSION: dict[str, str] = {
    **_sources(
        "ts-station",
        "ts.station",
        {
            "entity/Station.java": STATION_ENTITY,
            "repository/StationRepository.java": STATION_REPOSITORY,
            "service/StationService.java": STATION_SERVICE,
            "service/StationServiceImpl.java": STATION_SERVICE_IMPL,
            "controller/StationController.java": STATION_CONTROLLER,
        },
    ),
    **_sources(
        "ts-price",
        "ts.price",
        {
            "entity/Price.java": PRICE_ENTITY,
            "repository/PriceRepository.java": PRICE_REPOSITORY,
            "service/PriceService.java": PRICE_SERVICE,
            "service/PriceServiceImpl.java": PRICE_SERVICE_IMPL,
            "controller/PriceController.java": PRICE_CONTROLLER,
        },
    ),
    **_sources(
        "ts-order",
        "ts.order",
        {
            "entity/Order.java": ORDER_ENTITY,
            "entity/OrderDTO.java": ORDER_DTO,
            "repository/OrderRepository.java": ORDER_REPOSITORY,
            "service/OrderService.java": ORDER_SERVICE,
            "service/OrderServiceImpl.java": ORDER_SERVICE_IMPL,
            "controller/OrderController.java": ORDER_CONTROLLER,
        },
    ),
}

# Version changes:
#   The files each later version overrides, relative to the version before it.
VERSION_CHANGES: list[dict[str, str]] = [
    {
        **_sources(
            "ts-station",
            "ts.station",
            {"service/StationServiceImpl.java": STATION_SERVICE_IMPL_CHECKED},
        ),
        **_sources(
            "ts-price",
            "ts.price",
            {"controller/PriceController.java": PRICE_CONTROLLER_REFORMATTED},
        ),
    },
    _sources(
        "ts-station",
        "ts.station",
        {"repository/StationRepository.java": STATION_REPOSITORY_WITHOUT_QUERY},
    ),
    _sources(
        "ts-station",
        "ts.station",
        {"controller/StationController.java": STATION_CONTROLLER_WITHOUT_ENDPOINT},
    ),
    {
        **_sources(
            "ts-station",
            "ts.station",
            {"service/StationServiceImpl.java": STATION_SERVICE_IMPL_COMMENTED},
        ),
        **_sources(
            "ts-order",
            "ts.order",
            {"controller/OrderController.java": ORDER_CONTROLLER_STATUS},
        ),
    },
    {
        **_sources(
            "ts-station",
            "ts.station",
            {"controller/StationController.java": STATION_CONTROLLER},
        ),
        **_sources(
            "ts-order",
            "ts.order",
            {
                "controller/OrderController.java": ORDER_CONTROLLER_DTO,
                "service/OrderService.java": ORDER_SERVICE_DTO,
                "service/OrderServiceImpl.java": ORDER_SERVICE_IMPL_DTO,
            },
        ),
    },
]

# Golden timeseries:
#   The expected time series of the fixture history.
GOLDEN_TIMESERIES_FILEPATH: str = os.path.join(
    os.path.dirname(__file__), "data", "timeseries.csv"
)


def write_tree(root: str, files: dict[str, str]) -> str:
    """Write a source tree, adding a build descriptor to every service directory."""

    for relative_path, text in files.items():
        filepath = os.path.join(root, relative_path)
        os.makedirs(os.path.dirname(filepath), exist_ok=True)
        with open(filepath, "w", encoding="utf-8") as source_file:
            source_file.write(text)
    for service in {relative_path.split(os.sep)[0] for relative_path in files}:
        with open(os.path.join(root, service, "pom.xml"), "w", encoding="utf-8") as pom:
            pom.write(BUILD_DESCRIPTOR.format(name=service))
    return root


def write_history(root: str) -> list[str]:
    """Write the six fixture versions under `root` as `v0` to `v5`."""

    files = dict(BASELINE_VERSION)
    directories = [write_tree(os.path.join(root, "v0"), files)]
    for index, changes in enumerate(VERSION_CHANGES, start=1):
        files.update(changes)
        directories.append(write_tree(os.path.join(root, f"v{index}"), files))
    return directories


@pytest.fixture(name="logger")
def fixture_logger() -> logging.Logger:
    return logging.getLogger("microsar-tests")


@pytest.fixture(name="profile")
def fixture_profile(logger):
    return load_profile(None, logger)


@pytest.fixture(name="history")
def fixture_history(tmp_path) -> list[str]:
    return write_history(str(tmp_path / "history"))


def extract_system(version_directory, profile, logger, version_id=None):
    """Reconstruct a fixture version from scratch."""

    version_id = version_id or os.path.basename(version_directory)
    return build_system_ir(
        [
            scan_repository(
                os.path.join(version_directory, service),
                profile,
                service,
                version_id,
                logger,
            )
            for service in SERVICES
        ]
    )


@pytest.fixture(name="baseline")
def fixture_baseline(history, profile, logger):
    return extract_system(history[0], profile, logger)


@pytest.fixture(name="extract")
def fixture_extract(profile, logger):
    """Return a function reconstructing a fixture version from scratch."""

    return lambda version_directory: extract_system(version_directory, profile, logger)
