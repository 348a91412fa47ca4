public class Run10 {
    public static void main(String[] args) {
        int acc = 0;
        for (int j = 0; j < 13; j++) {
            acc = acc + j * 2;
        }
        System.out.println(acc);
    }
}
