package shop.catalog;

import shop.common.Money;

public class StandardPricing implements PricingPolicy {
    double discountRate;

    public StandardPricing(double discountRate) {
        this.discountRate = discountRate;
    }

    public Money priceOf(Product product, int quantity) {
        long cents = product.basePrice().cents() * quantity;
        long discounted = cents - Math.round(cents * discountRate);
        return new Money(discounted, "USD");
    }
}
