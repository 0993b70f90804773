package corpus;

public class Inventory {
    static class Item {
        final String sku;
        int qty;
        final int priceCents;

        Item(String sku, int qty, int priceCents) {
            this.sku = sku;
            this.qty = qty;
            this.priceCents = priceCents;
        }
    }

    private final Item[] items;
    private int count;

    Inventory(int cap) {
        items = new Item[cap];
    }

    Item find(String sku) {
        for (int i = 0; i < count; i++) {
            if (items[i].sku.equals(sku)) return items[i];
        }
        return null;
    }

    boolean add(String sku, int qty, int price) {
        Item it = find(sku);
        if (it != null) {
            it.qty += qty;
            return true;
        }
        if (count == items.length) return false;
        items[count++] = new Item(sku, qty, price);
        return true;
    }

    int take(String sku, int qty) {
        Item it = find(sku);
        if (it == null) return 0;
        int got = Math.min(qty, it.qty);
        it.qty -= got;
        return got;
    }

    long value() {
        long v = 0;
        for (int i = 0; i < count; i++) v += (long) items[i].qty * items[i].priceCents;
        return v;
    }

    static class Order {
        final String[] skus;
        final int[] qtys;

        Order(String[] skus, int[] qtys) {
            this.skus = skus;
            this.qtys = qtys;
        }

        int fill(Inventory inv) {
            int filled = 0;
            for (int i = 0; i < skus.length; i++) {
                filled += inv.take(skus[i], qtys[i]);
            }
            return filled;
        }
    }
}
